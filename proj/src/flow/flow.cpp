#include "flow/flow.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace kinetic {

VelocityMap VelocityMap::identity() {
    VelocityMap m;
    m.a = [](const Vec& v, int) { return v; };
    m.kin = [](const Vec& v, int d) { return 0.5 * norm2(v, d); };
    m.name = "identity";
    return m;
}

VelocityMap VelocityMap::relativistic() {
    VelocityMap m;
    m.a = [](const Vec& v, int d) {
        const double g = 1.0 / std::sqrt(1.0 + norm2(v, d));
        return Vec{v[0] * g, v[1] * g};
    };
    m.kin = [](const Vec& v, int d) { return std::sqrt(1.0 + norm2(v, d)); };
    m.name = "relativistic";
    return m;
}

Vec reflect(const Vec& v, const Vec& n, int dim) {
    const double nn = norm2(n, dim);
    if (std::abs(nn - 1.0) > 1e-9) throw ContractError("reflect: normal must be unit length");
    const double vn = dot(v, n, dim);
    Vec out = v;
    for (int i = 0; i < dim; ++i) out[i] -= 2.0 * vn * n[i];
    return out;
}

State flow_step(const State& s, const PotentialSpec& pot, const DomainSpec& dom, double h,
                const VelocityMap& vmap) {
    if (!(h != 0) || !std::isfinite(h)) throw ContractError("flow_step: step size must be finite and nonzero");
    const int d = dom.dim();
    State out = s;
    Vec g = pot.gradient(s.x, dom);
    if (!std::isfinite(g[0]) || !std::isfinite(g[1])) throw NumericError("flow_step: non-finite gradient");
    Vec vh = s.v;
    for (int i = 0; i < d; ++i) vh[i] -= 0.5 * h * g[i];
    const Vec a = vmap.a(vh, d);
    for (int i = 0; i < d; ++i) out.x[i] = s.x[i] + h * a[i];
    out.x = dom.canonicalize(out.x);
    g = pot.gradient(out.x, dom);
    for (int i = 0; i < d; ++i) out.v[i] = vh[i] - 0.5 * h * g[i];
    out.t = s.t + h;
    out.energy0 = s.energy0;
    return out;
}

namespace {

double energy(const State& s, const PotentialSpec& pot, const DomainSpec& dom, const VelocityMap& m, int dim) {
    return m.kin(s.v, dim) + pot.value(s.x, dom);
}

/**
 * Shared stepping core: advances by at most `h`, applying a specular
 * reflection when the step crosses the wall. Returns false (with `status`
 * set) on corner/grazing events. `advanced` reports how much of `h` was
 * actually consumed (a reflection stops the sub-step at the wall).
 */
bool advance(State& s, const PotentialSpec& pot, const DomainSpec& dom, double h, bool backward,
             const TraceOptions& opts, double& advanced, bool& reflected, ReflectionEvent* event,
             TraceStatus& status) {
    const int d = dom.dim();
    reflected = false;
    const double hsigned = backward ? -h : h;
    State next = flow_step(s, pot, dom, hsigned, opts.vmap);
    if (!dom.bounded() || dom.boundary_value(next.x) < 0.0) {
        s = next;
        advanced = h;
        return true;
    }
    double t_in = 0.0, t_out = h;
    while (t_out - t_in > opts.bisect_tol) {
        const double tm = 0.5 * (t_in + t_out);
        State sm = flow_step(s, pot, dom, backward ? -tm : tm, opts.vmap);
        (dom.boundary_value(sm.x) >= 0.0 ? t_out : t_in) = tm;
    }
    State hit = flow_step(s, pot, dom, backward ? -t_out : t_out, opts.vmap);
    advanced = t_out;
    if (dom.corner_distance(hit.x) < opts.corner_tol) {
        status = TraceStatus::CornerHit;
        s = hit;
        return false;
    }
    const Vec n = dom.outward_normal(hit.x);
    const double speed = vec_norm(hit.v, d);
    if (std::abs(dot(hit.v, n, d)) < opts.grazing_tol * std::max(speed, 1e-300)) {
        status = TraceStatus::GrazingHit;
        s = hit;
        return false;
    }
    const Vec v_out = reflect(hit.v, n, d);
    if (event) {
        event->t = hit.t;
        event->point = hit.x;
        event->v_in = hit.v;
        event->v_out = v_out;
    }
    hit.v = v_out;
    s = hit;
    reflected = true;
    return true;
}

} // namespace

TrajectoryRecord trace(const State& start, const PotentialSpec& pot, const DomainSpec& dom,
                       double T, double h, const TraceOptions& opts) {
    if (!(T > 0) || !(h > 0)) throw ContractError("trace: T and h must be positive");
    if (dom.bounded() && !dom.inside(start.x)) throw ContractError("trace: start position must be interior");
    const int d = dom.dim();

    TrajectoryRecord rec;
    State s = start;
    s.t = 0;
    s.energy0 = energy(s, pot, dom, opts.vmap, d);
    rec.samples.push_back(s);
    double next_sample = opts.sample_dt;
    long n_reflections = 0;

    double elapsed = 0.0;
    while (elapsed < T - 1e-12) {
        const double hh = std::min(h, T - elapsed);
        double advanced = 0.0;
        bool reflected = false;
        ReflectionEvent ev;
        TraceStatus st = TraceStatus::Completed;
        if (!advance(s, pot, dom, hh, opts.backward, opts, advanced, reflected, &ev, st)) {
            rec.status = st;
            rec.samples.push_back(s);
            return rec;
        }
        if (reflected) {
            rec.reflections.push_back(ev);
            if (++n_reflections > opts.max_reflections) {
                rec.status = TraceStatus::MaxReflections;
                rec.samples.push_back(s);
                return rec;
            }
        }
        elapsed += advanced;
        rec.max_energy_drift =
            std::max(rec.max_energy_drift, std::abs(energy(s, pot, dom, opts.vmap, d) - s.energy0));
        if (!std::isfinite(s.x[0]) || !std::isfinite(s.v[0]))
            throw NumericError("trace: non-finite state at t=" + std::to_string(s.t));
        if (opts.sample_dt <= 0) {
            rec.samples.push_back(s);
        } else if (elapsed + 1e-12 >= next_sample) {
            rec.samples.push_back(s);
            while (next_sample <= elapsed + 1e-12) next_sample += opts.sample_dt;
        }
    }
    if (opts.sample_dt > 0 &&
        (rec.samples.size() < 2 || std::abs(rec.samples.back().t - s.t) > 1e-12))
        rec.samples.push_back(s);
    return rec;
}

State closed_form_harmonic(const Vec& x, const Vec& v, const Vec& x0, double eps, double t, int dim) {
    if (!(eps > 0)) throw ContractError("closed_form_harmonic: eps must be positive");
    const double w = std::sqrt(eps);
    const double c = std::cos(w * t), s = std::sin(w * t);
    State out;
    for (int i = 0; i < dim; ++i) {
        const double dx = x[i] - x0[i];
        out.x[i] = x0[i] + dx * c + v[i] / w * s;
        out.v[i] = -dx * w * s + v[i] * c;
    }
    out.t = t;
    return out;
}

HittingResult hitting_time(const State& start, const PhaseSetTest& in_set, const PotentialSpec& pot,
                           const DomainSpec& dom, double T_max, double h, bool backward,
                           const TraceOptions& opts_in) {
    HittingResult res;
    if (in_set(dom.canonicalize(start.x), start.v)) {
        res.time = 0.0;
        return res;
    }
    TraceOptions opts = opts_in;
    const int d = dom.dim();
    State s = start;
    s.t = 0;
    s.energy0 = energy(s, pot, dom, opts.vmap, d);

    long n_reflections = 0;
    double elapsed = 0.0;
    while (elapsed < T_max - 1e-12) {
        const double hh = std::min(h, T_max - elapsed);
        double advanced = 0.0;
        bool reflected = false;
        TraceStatus st = TraceStatus::Completed;
        ReflectionEvent ev;
        if (!advance(s, pot, dom, hh, backward, opts, advanced, reflected, &ev, st)) {
            res.status = st;
            return res;
        }
        if (reflected && ++n_reflections > opts.max_reflections) {
            res.status = TraceStatus::MaxReflections;
            return res;
        }
        elapsed += advanced;
        if (in_set(s.x, s.v)) {
            res.time = elapsed;
            return res;
        }
    }
    return res;  // absent within T_max
}

} // namespace kinetic
