#include "geometry/potential.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace kinetic {

namespace {

// C^1 taper: 1 on u<=0, 0 on u>=1.
double taper(double u) {
    if (u <= 0) return 1.0;
    if (u >= 1) return 0.0;
    return 1.0 - u * u * (3.0 - 2.0 * u);
}
double taper_deriv(double u) {
    if (u <= 0 || u >= 1) return 0.0;
    return -6.0 * u * (1.0 - u);
}

} // namespace

PotentialSpec PotentialSpec::zero() { return PotentialSpec{}; }

PotentialSpec PotentialSpec::harmonic_trap(const Vec& x0, double eps, double eta, double cutoff) {
    if (!(eps > 0)) throw ConfigError("harmonic_trap strength eps must be positive");
    if (!(eta > 0)) throw ConfigError("harmonic_trap eta must be positive");
    PotentialSpec p;
    p.kind_ = PotentialKind::HarmonicTrap;
    p.x0_ = x0;
    p.eps_ = eps;
    p.eta_ = eta;
    p.cutoff_ = cutoff > 2.0 * eta ? cutoff : std::min(3.0 * eta, 0.49);
    if (!(p.cutoff_ > 2.0 * eta))
        throw ConfigError("harmonic_trap: give an explicit cutoff in (2*eta, 0.5)");
    if (p.cutoff_ >= 0.5) throw ConfigError("harmonic_trap cutoff must fit inside one torus period");
    return p;
}

PotentialSpec PotentialSpec::tabulated(const DomainSpec& dom, int nodes_per_axis,
                                       std::vector<double> values, std::vector<double> gradients) {
    const int d = dom.dim();
    const std::size_t n = static_cast<std::size_t>(nodes_per_axis);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= n;
    if (values.size() != total || gradients.size() != total * static_cast<std::size_t>(d))
        throw ConfigError("tabulated potential: node count does not match value/gradient table");
    PotentialSpec p;
    p.kind_ = PotentialKind::Tabulated;
    p.tab_nodes_ = nodes_per_axis;
    p.tab_dim_ = d;
    dom.bounding_box(p.tab_lo_, p.tab_hi_);
    p.tab_values_ = std::move(values);
    p.tab_gradients_ = std::move(gradients);
    return p;
}

double PotentialSpec::value(const Vec& x, const DomainSpec& dom) const {
    switch (kind_) {
        case PotentialKind::Zero:
            return 0.0;
        case PotentialKind::HarmonicTrap: {
            const Vec d = dom.wrap_delta(x, x0_);
            const double r = vec_norm(d, dom.dim());
            const double u = (r - 2.0 * eta_) / (cutoff_ - 2.0 * eta_);
            return 0.5 * eps_ * r * r * taper(u);
        }
        case PotentialKind::Tabulated: {
            // multilinear interpolation on the node grid
            const int d = tab_dim_;
            double f[2] = {0, 0};
            int i0[2] = {0, 0};
            for (int a = 0; a < d; ++a) {
                const double span = tab_hi_[a] - tab_lo_[a];
                double t = (x[a] - tab_lo_[a]) / span * (tab_nodes_ - 1);
                if (t < -1e-9 || t > tab_nodes_ - 1 + 1e-9)
                    throw ContractError("tabulated potential queried outside its table");
                t = std::max(0.0, std::min<double>(tab_nodes_ - 1, t));
                i0[a] = std::min(tab_nodes_ - 2, static_cast<int>(t));
                f[a] = t - i0[a];
            }
            auto at = [&](int ia, int ib) {
                const std::size_t idx = d == 1 ? static_cast<std::size_t>(ia)
                                               : static_cast<std::size_t>(ia) * tab_nodes_ + ib;
                return tab_values_[idx];
            };
            if (d == 1) return (1 - f[0]) * at(i0[0], 0) + f[0] * at(i0[0] + 1, 0);
            return (1 - f[0]) * (1 - f[1]) * at(i0[0], i0[1]) + f[0] * (1 - f[1]) * at(i0[0] + 1, i0[1]) +
                   (1 - f[0]) * f[1] * at(i0[0], i0[1] + 1) + f[0] * f[1] * at(i0[0] + 1, i0[1] + 1);
        }
    }
    return 0.0;
}

Vec PotentialSpec::gradient(const Vec& x, const DomainSpec& dom) const {
    switch (kind_) {
        case PotentialKind::Zero:
            return {0.0, 0.0};
        case PotentialKind::HarmonicTrap: {
            const Vec d = dom.wrap_delta(x, x0_);
            const double r = vec_norm(d, dom.dim());
            const double w = cutoff_ - 2.0 * eta_;
            const double u = (r - 2.0 * eta_) / w;
            const double psi = taper(u);
            const double dpsi = taper_deriv(u) / w;
            Vec g = {0, 0};
            for (int a = 0; a < dom.dim(); ++a) {
                g[a] = eps_ * psi * d[a];
                if (r > 0) g[a] += 0.5 * eps_ * r * dpsi * d[a];  // (r^2/2)' term through the taper
            }
            return g;
        }
        case PotentialKind::Tabulated: {
            const int d = tab_dim_;
            Vec g = {0, 0};
            for (int comp = 0; comp < d; ++comp) {
                // interpolate the tabulated gradient component the same way as the value
                double f[2] = {0, 0};
                int i0[2] = {0, 0};
                for (int a = 0; a < d; ++a) {
                    const double span = tab_hi_[a] - tab_lo_[a];
                    double t = (x[a] - tab_lo_[a]) / span * (tab_nodes_ - 1);
                    if (t < -1e-9 || t > tab_nodes_ - 1 + 1e-9)
                        throw ContractError("tabulated potential queried outside its table");
                    t = std::max(0.0, std::min<double>(tab_nodes_ - 1, t));
                    i0[a] = std::min(tab_nodes_ - 2, static_cast<int>(t));
                    f[a] = t - i0[a];
                }
                auto at = [&](int ia, int ib) {
                    const std::size_t node = d == 1 ? static_cast<std::size_t>(ia)
                                                    : static_cast<std::size_t>(ia) * tab_nodes_ + ib;
                    return tab_gradients_[node * d + comp];
                };
                if (d == 1) {
                    g[comp] = (1 - f[0]) * at(i0[0], 0) + f[0] * at(i0[0] + 1, 0);
                } else {
                    g[comp] = (1 - f[0]) * (1 - f[1]) * at(i0[0], i0[1]) +
                              f[0] * (1 - f[1]) * at(i0[0] + 1, i0[1]) +
                              (1 - f[0]) * f[1] * at(i0[0], i0[1] + 1) +
                              f[0] * f[1] * at(i0[0] + 1, i0[1] + 1);
                }
            }
            return g;
        }
    }
    return {0.0, 0.0};
}

PotentialSpec::Smoothness PotentialSpec::smoothness(const DomainSpec& dom) const {
    Smoothness s;
    if (kind_ == PotentialKind::Zero) return s;
    Vec lo, hi;
    dom.bounding_box(lo, hi);
    const int n = 64;
    const double h = 1e-5;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < (dom.dim() > 1 ? n : 1); ++j) {
            Vec x = {lo[0] + (hi[0] - lo[0]) * (i + 0.5) / n,
                     dom.dim() > 1 ? lo[1] + (hi[1] - lo[1]) * (j + 0.5) / n : 0.0};
            if (dom.bounded() && !dom.inside(x)) continue;
            s.sup_value = std::max(s.sup_value, std::abs(value(x, dom)));
            const Vec g = gradient(x, dom);
            s.sup_gradient = std::max(s.sup_gradient, vec_norm(g, dom.dim()));
            for (int a = 0; a < dom.dim(); ++a) {
                Vec xp = x, xm = x;
                xp[a] += h;
                xm[a] -= h;
                const Vec gp = gradient(dom.canonicalize(xp), dom);
                const Vec gm = gradient(dom.canonicalize(xm), dom);
                for (int b = 0; b < dom.dim(); ++b)
                    s.sup_hessian = std::max(s.sup_hessian, std::abs(gp[b] - gm[b]) / (2 * h));
            }
        }
    }
    return s;
}

std::string PotentialSpec::describe() const {
    switch (kind_) {
        case PotentialKind::Zero: return "zero";
        case PotentialKind::HarmonicTrap:
            return "harmonic_trap(eps=" + std::to_string(eps_) + ", eta=" + std::to_string(eta_) + ")";
        case PotentialKind::Tabulated: return "tabulated(" + std::to_string(tab_nodes_) + " nodes/axis)";
    }
    return "?";
}

double hamiltonian(const Vec& x, const Vec& v, const PotentialSpec& pot, const DomainSpec& dom) {
    return 0.5 * norm2(v, dom.dim()) + pot.value(x, dom);
}

} // namespace kinetic
