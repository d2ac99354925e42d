#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geometry/domain.hpp"

namespace kinetic {

enum class PotentialKind { Zero, HarmonicTrap, Tabulated };

/**
 * Confining potential V(x) with analytic gradient.
 *
 * harmonic_trap is the cutoff quadratic well V(x) = eps|x-x0|^2/2 on
 * B(x0, 2*eta), smoothly brought to zero beyond the cutoff radius so it is
 * C^1 on the torus; inside B(x0, 2*eta) it is exactly quadratic.
 */
class PotentialSpec {
public:
    static PotentialSpec zero();
    static PotentialSpec harmonic_trap(const Vec& x0, double eps, double eta, double cutoff = 0.0);
    /// Tabulated on a uniform grid over the domain bounding box; value + gradient columns.
    static PotentialSpec tabulated(const DomainSpec& dom, int nodes_per_axis,
                                   std::vector<double> values, std::vector<double> gradients);

    PotentialKind kind() const { return kind_; }
    bool is_zero() const { return kind_ == PotentialKind::Zero; }

    double value(const Vec& x, const DomainSpec& dom) const;
    Vec gradient(const Vec& x, const DomainSpec& dom) const;

    double eps() const { return eps_; }
    double eta() const { return eta_; }
    double cutoff() const { return cutoff_; }
    const Vec& center() const { return x0_; }

    /// Sup-norm metadata (|V|, |grad V|, |hess V| bounds), estimated on a probe grid.
    struct Smoothness {
        double sup_value = 0;
        double sup_gradient = 0;
        double sup_hessian = 0;
    };
    Smoothness smoothness(const DomainSpec& dom) const;

    std::string describe() const;

private:
    PotentialSpec() = default;

    PotentialKind kind_ = PotentialKind::Zero;
    Vec x0_ = {0, 0};
    double eps_ = 0;
    double eta_ = 0;
    double cutoff_ = 0;

    // tabulated data
    int tab_nodes_ = 0;
    int tab_dim_ = 0;
    Vec tab_lo_ = {0, 0};
    Vec tab_hi_ = {0, 0};
    std::vector<double> tab_values_;
    std::vector<double> tab_gradients_;  // dim components per node
};

/// H(x,v) = |v|^2/2 + V(x)
double hamiltonian(const Vec& x, const Vec& v, const PotentialSpec& pot, const DomainSpec& dom);

} // namespace kinetic
