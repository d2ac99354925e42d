#include "kernels/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace kinetic {

namespace {
const double kTwoPi = 6.28318530717958647692528676655900577;

double ramp01(double t) { return t <= 0 ? 1.0 : (t >= 1 ? 0.0 : 1.0 - t); }
} // namespace

double maxwellian(const Vec& v, int dim) {
    return std::pow(kTwoPi, -0.5 * dim) * std::exp(-0.5 * norm2(v, dim));
}

// ---------------------------------------------------------------------------
// Profiles

Profile Profile::constant(double c) {
    Profile p;
    p.kind_ = Kind::Constant;
    p.c_ = c;
    return p;
}

Profile Profile::ball(const Vec& center, double r_inner, double r_outer, double height) {
    if (!(r_outer > r_inner) || !(r_inner >= 0)) throw ConfigError("profile ball needs 0 <= r_inner < r_outer");
    Profile p;
    p.kind_ = Kind::Ball;
    p.center_ = center;
    p.r_in_ = r_inner;
    p.r_out_ = r_outer;
    p.height_ = height;
    return p;
}

Profile Profile::interval(double lo, double hi, double ramp, double height) {
    if (!(hi > lo)) throw ConfigError("profile interval needs lo < hi");
    if (!(ramp >= 0) || 2 * ramp >= hi - lo) throw ConfigError("profile interval ramp too wide");
    Profile p;
    p.kind_ = Kind::Interval;
    p.lo_ = lo;
    p.hi_ = hi;
    p.ramp_ = ramp;
    p.height_ = height;
    return p;
}

double Profile::operator()(const Vec& x, const DomainSpec& dom) const {
    switch (kind_) {
        case Kind::Constant:
            return c_;
        case Kind::Ball: {
            const Vec d = dom.wrap_delta(x, center_);
            const double r = vec_norm(d, dom.dim());
            return height_ * ramp01((r - r_in_) / (r_out_ - r_in_));
        }
        case Kind::Interval: {
            double t = x[0];
            if (dom.kind() == DomainKind::Torus) t -= std::floor(t);
            if (t < lo_ || t > hi_) return 0.0;
            if (ramp_ <= 0) return height_;
            const double din = std::min(t - lo_, hi_ - t);
            return height_ * std::min(1.0, din / ramp_);
        }
    }
    return 0.0;
}

std::string Profile::describe() const {
    switch (kind_) {
        case Kind::Constant: return "constant(" + std::to_string(c_) + ")";
        case Kind::Ball:
            return "ball(c=" + std::to_string(center_[0]) + "," + std::to_string(center_[1]) +
                   ", r=" + std::to_string(r_in_) + ".." + std::to_string(r_out_) + ")";
        case Kind::Interval:
            return "interval(" + std::to_string(lo_) + ".." + std::to_string(hi_) + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Built-in velocity factors

namespace vshape {

double one(const Vec&, int) { return 1.0; }

// plateau 1 on |v|<=2 with continuous exponential decay beyond
double psi_plateau(const Vec& v, int d) {
    const double s = vec_norm(v, d);
    return s <= 2.0 ? 1.0 : std::exp(-(s - 2.0));
}

// positive exactly on v_1 < 0 (two-class left factor)
double phi_neg(const Vec& v, int) { return v[0] < 0 ? -v[0] / (1.0 + v[0] * v[0]) : 0.0; }
// positive exactly on v_1 > 0
double psi_pos(const Vec& v, int) { return v[0] > 0 ? v[0] / (1.0 + v[0] * v[0]) : 0.0; }

// vanishes only at v = 0
double abs_shape(const Vec& v, int d) {
    const double s = vec_norm(v, d);
    return s / (1.0 + s * s);
}

} // namespace vshape

// ---------------------------------------------------------------------------
// KernelSpec factories

KernelSpec KernelSpec::linear_relaxation(Profile sigma) {
    KernelSpec k;
    k.family_ = KernelFamily::LinearRelaxation;
    k.name_ = "linear_relaxation";
    k.terms_.push_back({sigma, vshape::one, vshape::one, "sigma"});
    return k;
}

KernelSpec KernelSpec::factorized(Profile sigma, double kstar_const) {
    if (!(kstar_const > 0)) throw ConfigError("factorized kernel needs a positive k*");
    KernelSpec k;
    k.family_ = KernelFamily::Factorized;
    k.name_ = "factorized";
    const double c = kstar_const;
    k.terms_.push_back({sigma, [c](const Vec&, int) { return c; }, vshape::one, "sigma_kstar"});
    return k;
}

KernelSpec KernelSpec::mult_example(double alpha_height, double psi_amp) {
    KernelSpec k;
    k.family_ = KernelFamily::MultExample;
    k.name_ = "mult_example";
    // alpha: 1 on circle-distance <= 1/4 from x=0, support within distance 1/3
    k.terms_.push_back({Profile::ball(vec1(0.0), 0.25, 1.0 / 3.0, alpha_height), vshape::one, vshape::one, "alpha"});
    const double a = psi_amp;
    auto psi = [a](const Vec& v, int d) { return a * vshape::psi_plateau(v, d); };
    k.terms_.push_back({Profile::constant(1.0), psi, psi, "psi_psi"});
    return k;
}

KernelSpec KernelSpec::degenerate_v() {
    KernelSpec k;
    k.family_ = KernelFamily::DegenerateV;
    k.name_ = "degenerate_v";
    auto m = [](const Vec& v, int d) { return maxwellian(v, d); };
    k.terms_.push_back({Profile::constant(1.0), m, m, "maxwell_maxwell"});
    return k;
}

KernelSpec KernelSpec::two_class(Profile alpha, Profile beta, double amp) {
    KernelSpec k;
    k.family_ = KernelFamily::TwoClass;
    k.name_ = "two_class";
    auto phi = [amp](const Vec& v, int d) { return amp * vshape::phi_neg(v, d); };
    auto Psi = [amp](const Vec& v, int d) { return amp * vshape::psi_pos(v, d); };
    k.terms_.push_back({alpha, phi, phi, "alpha_phi"});
    k.terms_.push_back({beta, Psi, Psi, "beta_Psi"});
    return k;
}

KernelSpec KernelSpec::phi_zero(double amp) {
    KernelSpec k;
    k.family_ = KernelFamily::PhiZero;
    k.name_ = "phi_zero";
    auto phi = [amp](const Vec& v, int d) { return amp * vshape::abs_shape(v, d); };
    k.terms_.push_back({Profile::constant(1.0), phi, phi, "phi_phi"});
    return k;
}

KernelSpec KernelSpec::tabulated(std::vector<double> ktilde, int nx, int nv_total) {
    KernelSpec k;
    k.family_ = KernelFamily::Tabulated;
    k.name_ = "tabulated";
    if (ktilde.size() != static_cast<std::size_t>(nx) * nv_total * nv_total)
        throw ConfigError("tabulated kernel table size mismatch");
    k.table_ = std::move(ktilde);
    k.table_nx_ = nx;
    k.table_nv_ = nv_total;
    k.symmetric_ = false;  // unknown until validated
    return k;
}

KernelSpec KernelSpec::custom_separable(std::vector<SeparableTerm> terms, std::string name) {
    KernelSpec k;
    k.family_ = KernelFamily::CustomSeparable;
    k.name_ = std::move(name);
    k.terms_ = std::move(terms);
    k.symmetric_ = false;
    return k;
}

bool KernelSpec::omega_factorizes() const {
    return family_ == KernelFamily::LinearRelaxation || family_ == KernelFamily::Factorized;
}

double KernelSpec::eval(const Vec& x, const Vec& v_first, const Vec& v_second, const DomainSpec& dom,
                        int dim) const {
    if (family_ == KernelFamily::Tabulated)
        throw ContractError("tabulated kernels evaluate through a BoundKernel");
    double kt = 0.0;
    for (const auto& t : terms_) kt += t.s(x, dom) * t.p(v_first, dim) * t.q(v_second, dim);
    return kt * maxwellian(v_second, dim);
}

// ---------------------------------------------------------------------------
// BoundKernel

BoundKernel::BoundKernel(const KernelSpec& spec, const PhaseGrid& grid, const PotentialSpec& pot,
                         int threads)
    : spec_(spec), grid_(grid), threads_(std::max(1, threads)) {
    const int d = grid.dim();
    const std::size_t Nv = grid.num_v_cells();
    const std::size_t Nx = grid.num_x_cells();

    if (spec_.family() == KernelFamily::Tabulated) {
        if (spec_.table_nx() != static_cast<int>(Nx) || spec_.table_nv() != static_cast<int>(Nv))
            throw ConfigError("tabulated kernel dimensions do not match the grid");
        for (double v : spec_.table())
            if (v < 0) throw ContractError("A1 violation: tabulated kernel has a negative entry");
    }

    maxw_.resize(Nv);
    for (std::size_t iv = 0; iv < Nv; ++iv) maxw_[iv] = maxwellian(grid.v_center(iv), d);

    if (spec_.separable()) {
        tt_.resize(spec_.terms().size());
        for (std::size_t m = 0; m < tt_.size(); ++m) {
            const auto& term = spec_.terms()[m];
            auto& t = tt_[m];
            t.s.resize(Nx);
            for (std::size_t ix = 0; ix < Nx; ++ix) {
                t.s[ix] = grid.x_inside(ix) ? term.s(grid.x_center(ix), grid.domain()) : 0.0;
                if (t.s[ix] < 0)
                    throw ContractError("A1 violation: negative spatial profile at a grid node");
            }
            t.p.resize(Nv);
            t.q.resize(Nv);
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                const Vec v = grid.v_center(iv);
                t.p[iv] = term.p(v, d);
                t.q[iv] = term.q(v, d);
                if (t.p[iv] < 0 || t.q[iv] < 0)
                    throw ContractError("A1 violation: negative kernel factor at a grid node");
            }
            t.Qm = 0;
            t.Pm = 0;
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                t.Qm += grid.w_v() * t.q[iv] * maxw_[iv];
                t.Pm += grid.w_v() * t.p[iv] * maxw_[iv];
            }
        }
    }

    // collision frequency table b(x_i, v_j) = sum_j' w k(x, v_j, v_j')
    b_table_.assign(Nx * Nv, 0.0);
    for (std::size_t ix : grid.inside_x()) {
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            double b = 0.0;
            if (spec_.separable()) {
                for (const auto& t : tt_) b += t.s[ix] * t.p[iv] * t.Qm;
            } else {
                const auto& tab = spec_.table();
                for (std::size_t jv = 0; jv < Nv; ++jv)
                    b += grid.w_v() * tab[(ix * Nv + iv) * Nv + jv] * maxw_[jv];
            }
            b_table_[ix * Nv + iv] = b;
            max_b_ = std::max(max_b_, b);
        }
    }

    // sup of the symmetrized ktilde (finite-grid estimate)
    if (spec_.separable()) {
        double smax = 0;
        for (const auto& t : tt_) {
            double sm = 0, pm = 0, qm = 0;
            for (double v : t.s) sm = std::max(sm, v);
            for (double v : t.p) pm = std::max(pm, v);
            for (double v : t.q) qm = std::max(qm, v);
            smax += sm * pm * qm;
        }
        sup_kbar_ = smax;
    } else {
        double smax = 0;
        const auto& tab = spec_.table();
        const std::size_t Nv2 = Nv * Nv;
        for (std::size_t ix : grid.inside_x())
            for (std::size_t ab = 0; ab < Nv2; ++ab) {
                const std::size_t ia = ab / Nv, ib = ab % Nv;
                const double kb = 0.5 * (tab[(ix * Nv + ia) * Nv + ib] + tab[(ix * Nv + ib) * Nv + ia]);
                smax = std::max(smax, kb);
            }
        sup_kbar_ = smax;
    }
    (void)pot;
}

double BoundKernel::b_continuous(const Vec& x, const Vec& v) const {
    const int d = grid_.dim();
    if (spec_.separable()) {
        double b = 0.0;
        for (std::size_t m = 0; m < tt_.size(); ++m) {
            const auto& term = spec_.terms()[m];
            b += term.s(x, grid_.domain()) * term.p(v, d) * tt_[m].Qm;
        }
        return b;
    }
    std::size_t ix, iv;
    if (!grid_.locate_x(grid_.domain().canonicalize(x), ix) || !grid_.locate_v(v, iv)) return 0.0;
    return b_grid(ix, iv);
}

void BoundKernel::gain_column(std::size_t ix, const double* fcol, double* gain) const {
    const std::size_t Nv = grid_.num_v_cells();
    if (spec_.separable()) {
        for (std::size_t iv = 0; iv < Nv; ++iv) gain[iv] = 0.0;
        for (const auto& t : tt_) {
            if (t.s[ix] == 0.0) continue;
            double moment = 0.0;  // sum w p(v') f(v')
            for (std::size_t jv = 0; jv < Nv; ++jv) moment += grid_.w_v() * t.p[jv] * fcol[jv];
            const double c = t.s[ix] * moment;
            for (std::size_t iv = 0; iv < Nv; ++iv) gain[iv] += c * t.q[iv] * maxw_[iv];
        }
        return;
    }
    const auto& tab = spec_.table();
    for (std::size_t iv = 0; iv < Nv; ++iv) {
        double g = 0.0;
        for (std::size_t jv = 0; jv < Nv; ++jv) g += grid_.w_v() * tab[(ix * Nv + jv) * Nv + iv] * fcol[jv];
        gain[iv] = g * maxw_[iv];
    }
}

void BoundKernel::gain_column_sym(std::size_t ix, const double* fcol, double* gain) const {
    const std::size_t Nv = grid_.num_v_cells();
    if (spec_.separable()) {
        for (std::size_t iv = 0; iv < Nv; ++iv) gain[iv] = 0.0;
        for (const auto& t : tt_) {
            if (t.s[ix] == 0.0) continue;
            double mp = 0.0, mq = 0.0;
            for (std::size_t jv = 0; jv < Nv; ++jv) {
                mp += grid_.w_v() * t.p[jv] * fcol[jv];
                mq += grid_.w_v() * t.q[jv] * fcol[jv];
            }
            for (std::size_t iv = 0; iv < Nv; ++iv)
                gain[iv] += 0.5 * t.s[ix] * (mp * t.q[iv] + mq * t.p[iv]) * maxw_[iv];
        }
        return;
    }
    const auto& tab = spec_.table();
    for (std::size_t iv = 0; iv < Nv; ++iv) {
        double g = 0.0;
        for (std::size_t jv = 0; jv < Nv; ++jv) {
            const double kb = 0.5 * (tab[(ix * Nv + jv) * Nv + iv] + tab[(ix * Nv + iv) * Nv + jv]);
            g += grid_.w_v() * kb * fcol[jv];
        }
        gain[iv] = g * maxw_[iv];
    }
}

void BoundKernel::apply_collision(const std::vector<double>& f, std::vector<double>& out) const {
    const std::size_t Nv = grid_.num_v_cells();
    if (f.size() != grid_.num_cells()) throw ContractError("apply_collision: field/grid shape mismatch");
    out.assign(grid_.num_cells(), 0.0);
    const auto& cols = grid_.inside_x();
    parallel_for(cols.size(), threads_, [&](std::size_t b, std::size_t e, std::size_t) {
        std::vector<double> gain(Nv);
        for (std::size_t c = b; c < e; ++c) {
            const std::size_t ix = cols[c];
            const double* fcol = f.data() + ix * Nv;
            double* ocol = out.data() + ix * Nv;
            gain_column(ix, fcol, gain.data());
            for (std::size_t iv = 0; iv < Nv; ++iv)
                ocol[iv] = gain[iv] - b_table_[ix * Nv + iv] * fcol[iv];
        }
    });
}

void BoundKernel::apply_gain(const std::vector<double>& f, std::vector<double>& out) const {
    const std::size_t Nv = grid_.num_v_cells();
    if (f.size() != grid_.num_cells()) throw ContractError("apply_gain: field/grid shape mismatch");
    out.assign(grid_.num_cells(), 0.0);
    const auto& cols = grid_.inside_x();
    parallel_for(cols.size(), threads_, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t c = b; c < e; ++c) {
            const std::size_t ix = cols[c];
            gain_column(ix, f.data() + ix * Nv, out.data() + ix * Nv);
        }
    });
}

void BoundKernel::symmetrized_apply(const std::vector<double>& f, std::vector<double>& out) const {
    const std::size_t Nv = grid_.num_v_cells();
    if (f.size() != grid_.num_cells()) throw ContractError("symmetrized_apply: field/grid shape mismatch");
    out.assign(grid_.num_cells(), 0.0);
    const auto& cols = grid_.inside_x();
    parallel_for(cols.size(), threads_, [&](std::size_t b, std::size_t e, std::size_t) {
        std::vector<double> gain(Nv);
        for (std::size_t c = b; c < e; ++c) {
            const std::size_t ix = cols[c];
            const double* fcol = f.data() + ix * Nv;
            double* ocol = out.data() + ix * Nv;
            gain_column_sym(ix, fcol, gain.data());
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                // symmetrized loss frequency: 0.5 sum_m s (p Qm + q Pm)
                double bsym = 0.0;
                if (spec_.separable()) {
                    for (const auto& t : tt_) bsym += 0.5 * t.s[ix] * (t.p[iv] * t.Qm + t.q[iv] * t.Pm);
                } else {
                    const auto& tab = spec_.table();
                    for (std::size_t jv = 0; jv < Nv; ++jv) {
                        const double kb =
                            0.5 * (tab[(ix * Nv + iv) * Nv + jv] + tab[(ix * Nv + jv) * Nv + iv]);
                        bsym += grid_.w_v() * kb * maxw_[jv];
                    }
                }
                ocol[iv] = gain[iv] - bsym * fcol[iv];
            }
        }
    });
}

double BoundKernel::dissipation_column(std::size_t ix, const double* fcol) const {
    const std::size_t Nv = grid_.num_v_cells();
    const double wv = grid_.w_v();
    if (spec_.separable()) {
        double acc = 0.0;
        for (const auto& t : tt_) {
            if (t.s[ix] == 0.0) continue;
            double P0 = 0, P1 = 0, P2 = 0, Q0 = 0, Q1 = 0, Q2 = 0;
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                const double g = fcol[iv] / maxw_[iv];
                const double wp = wv * t.p[iv] * maxw_[iv];
                const double wq = wv * t.q[iv] * maxw_[iv];
                P0 += wp;
                P1 += wp * g;
                P2 += wp * g * g;
                Q0 += wq;
                Q1 += wq * g;
                Q2 += wq * g * g;
            }
            acc += t.s[ix] * (P0 * Q2 + P2 * Q0 - 2.0 * P1 * Q1);
        }
        return acc;
    }
    const auto& tab = spec_.table();
    double acc = 0.0;
    for (std::size_t ia = 0; ia < Nv; ++ia) {
        const double ga = fcol[ia] / maxw_[ia];
        for (std::size_t ib = 0; ib < Nv; ++ib) {
            const double kb = tab[(ix * Nv + ia) * Nv + ib] + tab[(ix * Nv + ib) * Nv + ia];
            if (kb == 0.0) continue;
            const double gb = fcol[ib] / maxw_[ib];
            const double diff = gb - ga;
            acc += 0.5 * wv * wv * kb * maxw_[ia] * maxw_[ib] * diff * diff;
        }
    }
    return acc;
}

double BoundKernel::dissipation(const std::vector<double>& f) const {
    const std::size_t Nv = grid_.num_v_cells();
    const auto& cols = grid_.inside_x();
    const auto& pot = grid_.potential_values();
    return parallel_sum(cols.size(), threads_, [&](std::size_t c) {
        const std::size_t ix = cols[c];
        const double ev = pot.empty() ? 1.0 : std::exp(pot[ix]);
        return grid_.w_x() * ev * dissipation_column(ix, f.data() + ix * Nv);
    });
}

double BoundKernel::dissipation_inner_product(const std::vector<double>& f) const {
    std::vector<double> cf;
    apply_collision(f, cf);
    const std::size_t Nv = grid_.num_v_cells();
    const auto& cols = grid_.inside_x();
    const auto& pot = grid_.potential_values();
    const double w = grid_.w_cell();
    const double ip = parallel_sum(cols.size(), threads_, [&](std::size_t c) {
        const std::size_t ix = cols[c];
        const double ev = pot.empty() ? 1.0 : std::exp(pot[ix]);
        double acc = 0.0;
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const std::size_t i = ix * Nv + iv;
            acc += w * ev * cf[i] * f[i] / grid_.maxwellian_h(iv);
        }
        return acc;
    });
    return -2.0 * ip;
}

KernelReport BoundKernel::validate(double a2_tol) const {
    KernelReport rep;
    rep.family = spec_.name();
    const int d = grid_.dim();
    const std::size_t Nv = grid_.num_v_cells();
    const double wv = grid_.w_v();
    rep.max_b = max_b_;
    rep.sup_ktilde = sup_kbar_;

    // A1: scan kernel values on grid nodes (dense) / factor tables (separable, done at bind)
    rep.a1_min_value = 0.0;
    if (!spec_.separable()) {
        double mn = 0.0;
        for (double v : spec_.table()) mn = std::min(mn, v);
        rep.a1_min_value = mn;
        if (mn < 0) throw ContractError("A1 violation: negative kernel value");
    }

    // A2 residual: max over (x,v) of |sum_w' [k(x,v',v) Mh(v') - k(x,v,v') Mh(v)]|
    const auto& Mh = grid_.maxwellian_h();
    std::vector<double> ph_m(tt_.size(), 0.0), qh_m(tt_.size(), 0.0);
    for (std::size_t m = 0; m < tt_.size(); ++m) {
        for (std::size_t jv = 0; jv < Nv; ++jv) {
            ph_m[m] += wv * tt_[m].p[jv] * Mh[jv];       // gain side pairs with Mh(v')
            qh_m[m] += wv * tt_[m].q[jv] * maxw_[jv];    // loss side keeps the kernel's own M
        }
    }
    double res = 0.0;
    for (std::size_t ix : grid_.inside_x()) {
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            double gain_m = 0.0, loss_m = 0.0;
            if (spec_.separable()) {
                for (std::size_t m = 0; m < tt_.size(); ++m) {
                    const auto& t = tt_[m];
                    if (t.s[ix] == 0.0) continue;
                    gain_m += t.s[ix] * ph_m[m] * t.q[iv] * maxw_[iv];
                    loss_m += t.s[ix] * t.p[iv] * qh_m[m] * Mh[iv];
                }
            } else {
                const auto& tab = spec_.table();
                for (std::size_t jv = 0; jv < Nv; ++jv) {
                    gain_m += wv * tab[(ix * Nv + jv) * Nv + iv] * maxw_[iv] * Mh[jv];
                    loss_m += wv * tab[(ix * Nv + iv) * Nv + jv] * maxw_[jv] * Mh[iv];
                }
            }
            res = std::max(res, std::abs(gain_m - loss_m));
        }
    }
    rep.a2_residual = res;
    rep.a2_pass = res <= a2_tol;

    // A3 value: sup_x sum ww' ktilde^2 M M'
    double a3 = 0.0;
    if (spec_.separable()) {
        const std::size_t r = tt_.size();
        std::vector<double> PP(r * r, 0.0), QQ(r * r, 0.0);
        for (std::size_t m = 0; m < r; ++m)
            for (std::size_t n = 0; n < r; ++n) {
                double pp = 0, qq = 0;
                for (std::size_t iv = 0; iv < Nv; ++iv) {
                    pp += wv * tt_[m].p[iv] * tt_[n].p[iv] * maxw_[iv];
                    qq += wv * tt_[m].q[iv] * tt_[n].q[iv] * maxw_[iv];
                }
                PP[m * r + n] = pp;
                QQ[m * r + n] = qq;
            }
        for (std::size_t ix : grid_.inside_x()) {
            double val = 0.0;
            for (std::size_t m = 0; m < r; ++m)
                for (std::size_t n = 0; n < r; ++n)
                    val += tt_[m].s[ix] * tt_[n].s[ix] * PP[m * r + n] * QQ[m * r + n];
            a3 = std::max(a3, val);
        }
    } else {
        const auto& tab = spec_.table();
        for (std::size_t ix : grid_.inside_x()) {
            double val = 0.0;
            for (std::size_t ia = 0; ia < Nv; ++ia)
                for (std::size_t ib = 0; ib < Nv; ++ib) {
                    const double kt = tab[(ix * Nv + ia) * Nv + ib];
                    val += wv * wv * kt * kt * maxw_[ia] * maxw_[ib];
                }
            a3 = std::max(a3, val);
        }
    }
    rep.a3_value = a3;
    rep.gain_norm_bound = std::sqrt(a3);

    // A3': Theta(t) = lambda exp(t/4), lambda fitted so b <= Theta(H) on the grid
    double lam = 1.0;
    const auto& pot = grid_.potential_values();
    for (std::size_t ix : grid_.inside_x()) {
        const double Vx = pot.empty() ? 0.0 : pot[ix];
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const double H = 0.5 * norm2(grid_.v_center(iv), d) + Vx;
            lam = std::max(lam, b_grid(ix, iv) * std::exp(-0.25 * H));
        }
    }
    rep.a3p_lambda = lam;
    // Gamma = sup_x sum ww' ktilde^2 M M' (e^{(|v|^2-|v'|^2)/8} - 1)^2  (potential cancels in the ratio)
    double gam = 0.0;
    if (spec_.separable()) {
        const std::size_t r = tt_.size();
        auto mom = [&](const std::vector<double>& f1, const std::vector<double>& f2, double expo) {
            double acc = 0;
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                const double vv = norm2(grid_.v_center(iv), d);
                acc += wv * f1[iv] * f2[iv] * maxw_[iv] * std::exp(expo * vv);
            }
            return acc;
        };
        for (std::size_t ix : grid_.inside_x()) {
            double val = 0.0;
            for (std::size_t m = 0; m < r; ++m)
                for (std::size_t n = 0; n < r; ++n) {
                    const double ss = tt_[m].s[ix] * tt_[n].s[ix];
                    if (ss == 0.0) continue;
                    const double U0 = mom(tt_[m].p, tt_[n].p, 0.0);
                    const double U1 = mom(tt_[m].p, tt_[n].p, -0.125);
                    const double U2 = mom(tt_[m].p, tt_[n].p, -0.25);
                    const double W0 = mom(tt_[m].q, tt_[n].q, 0.0);
                    const double W1 = mom(tt_[m].q, tt_[n].q, 0.125);
                    const double W2 = mom(tt_[m].q, tt_[n].q, 0.25);
                    val += ss * (U2 * W2 - 2.0 * U1 * W1 + U0 * W0);
                }
            gam = std::max(gam, val);
        }
    } else {
        const auto& tab = spec_.table();
        for (std::size_t ix : grid_.inside_x()) {
            double val = 0.0;
            for (std::size_t ia = 0; ia < Nv; ++ia) {
                const double va = norm2(grid_.v_center(ia), d);
                for (std::size_t ib = 0; ib < Nv; ++ib) {
                    const double kt = tab[(ix * Nv + ia) * Nv + ib];
                    if (kt == 0.0) continue;
                    const double vb = norm2(grid_.v_center(ib), d);
                    const double ratio = std::exp(0.125 * (vb - va)) - 1.0;
                    val += wv * wv * kt * kt * maxw_[ia] * maxw_[ib] * ratio * ratio;
                }
            }
            gam = std::max(gam, val);
        }
    }
    rep.a3p_gamma = gam;
    rep.a3p_pass = std::isfinite(lam) && std::isfinite(gam);
    return rep;
}

// ---------------------------------------------------------------------------
// BGK

BgkEquilibrium build_bgk_equilibrium(const PhaseGrid& grid, const PotentialSpec& pot,
                                     const std::function<double(double)>& phi_of_h) {
    BgkEquilibrium eq;
    const std::size_t Nv = grid.num_v_cells();
    eq.F.assign(grid.num_cells(), 0.0);
    eq.rho_F.assign(grid.num_x_cells(), 0.0);
    for (std::size_t ix : grid.inside_x()) {
        const Vec x = grid.x_center(ix);
        const double Vx = pot.value(x, grid.domain());
        double rho = 0.0;
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const double H = 0.5 * norm2(grid.v_center(iv), grid.dim()) + Vx;
            const double F = phi_of_h(H);
            if (!(F > 0)) throw ConfigError("BGK equilibrium must be positive on the grid");
            eq.F[ix * Nv + iv] = F;
            rho += grid.w_v() * F;
        }
        if (!(rho > 0)) throw ConfigError("BGK equilibrium has vanishing density at a cell");
        eq.rho_F[ix] = rho;
    }
    return eq;
}

void bgk_apply(const Profile& sigma, const BgkEquilibrium& eq, const PhaseGrid& grid,
               const std::vector<double>& f, std::vector<double>& out) {
    if (f.size() != grid.num_cells()) throw ContractError("bgk_apply: field/grid shape mismatch");
    const std::size_t Nv = grid.num_v_cells();
    out.assign(grid.num_cells(), 0.0);
    for (std::size_t ix : grid.inside_x()) {
        const double s = sigma(grid.x_center(ix), grid.domain());
        double rho = 0.0;
        for (std::size_t iv = 0; iv < Nv; ++iv) rho += grid.w_v() * f[ix * Nv + iv];
        const double c = rho / eq.rho_F[ix];
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const std::size_t i = ix * Nv + iv;
            out[i] = s * (c * eq.F[i] - f[i]);
        }
    }
}

double bgk_dissipation(const Profile& sigma, const BgkEquilibrium& eq, const PhaseGrid& grid,
                       const std::vector<double>& f) {
    const std::size_t Nv = grid.num_v_cells();
    double acc = 0.0;
    for (std::size_t ix : grid.inside_x()) {
        const double s = sigma(grid.x_center(ix), grid.domain());
        if (s == 0.0) continue;
        double rho = 0.0, quad = 0.0;
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const std::size_t i = ix * Nv + iv;
            rho += grid.w_v() * f[i];
            quad += grid.w_v() * f[i] * f[i] / eq.F[i];
        }
        acc += grid.w_x() * s * 2.0 * (quad - rho * rho / eq.rho_F[ix]);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Non-degeneracy of generalized transport

NondegeneracyReport check_nondegeneracy(const std::function<Vec(const Vec&, int)>& a_map, int dim,
                                        double v_max, double eps, int n_samples, std::uint64_t seed) {
    if (!(eps > 0)) throw ContractError("check_nondegeneracy: eps must be positive");
    NondegeneracyReport rep;
    Rng rng(seed);
    const double box = std::pow(2.0 * v_max, dim);
    const int ndir = dim == 1 ? 2 : 32;
    std::vector<Vec> dirs;
    for (int i = 0; i < ndir; ++i) {
        if (dim == 1) {
            dirs.push_back(vec1(i == 0 ? 1.0 : -1.0));
        } else {
            const double a = kTwoPi * (i + 0.5) / ndir;
            dirs.push_back(vec2(std::cos(a), std::sin(a)));
        }
    }
    for (int k = 0; k < 6; ++k) rep.eps_sweep.push_back(eps / std::pow(2.0, k));
    rep.measures.assign(rep.eps_sweep.size(), 0.0);

    std::vector<Vec> samples(n_samples);
    for (auto& v : samples) {
        v = {rng.uniform(-v_max, v_max), dim > 1 ? rng.uniform(-v_max, v_max) : 0.0};
    }
    for (std::size_t ke = 0; ke < rep.eps_sweep.size(); ++ke) {
        double worst = 0.0;
        for (const Vec& xi : dirs) {
            std::size_t count = 0;
            for (const Vec& v : samples) {
                const Vec a = a_map(v, dim);
                if (std::abs(dot(a, xi, dim)) <= rep.eps_sweep[ke]) ++count;
            }
            worst = std::max(worst, box * static_cast<double>(count) / n_samples);
        }
        rep.measures[ke] = worst;
        if (ke == 0) rep.worst_measure = worst;
    }

    // fit log measure vs log eps on strictly positive, strictly shrinking entries
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < rep.eps_sweep.size(); ++i) {
        if (rep.measures[i] <= 0) continue;
        const double lx = std::log(rep.eps_sweep[i]);
        const double ly = std::log(rep.measures[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    rep.fitted_gamma = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
    // degeneracy: measure jumps from (near) full box to (near) zero under halving
    rep.degenerate = false;
    for (std::size_t i = 0; i + 1 < rep.measures.size(); ++i)
        if (rep.measures[i] >= 0.5 * box && rep.measures[i + 1] <= 1e-6 * box) rep.degenerate = true;
    if (n < 2) rep.degenerate = rep.degenerate || rep.worst_measure >= 0.5 * box;
    return rep;
}

} // namespace kinetic
