#pragma once

#include <cstddef>
#include <vector>

#include "geometry/domain.hpp"
#include "geometry/potential.hpp"

namespace kinetic {

/**
 * Tensor midpoint grid over x-domain x truncated velocity box [-v_max,v_max]^d.
 *
 * Velocities use the discrete Maxwellian M_h, i.e. the continuous Maxwellian
 * renormalized so that sum_j w_v M_h(v_j) = 1 exactly; built-in kernels are
 * assembled from M_h so that their stationary structure is exact at grid level.
 *
 * Bounded domains are discretized on the bounding box with an inside mask;
 * a cell belongs to the domain when its center does.
 */
class PhaseGrid {
public:
    PhaseGrid(const DomainSpec& domain, double v_max, int nx, int nv);

    const DomainSpec& domain() const { return domain_; }
    int dim() const { return domain_.dim(); }
    int nx() const { return nx_; }
    int nv() const { return nv_; }
    double v_max() const { return v_max_; }
    double dx() const { return dx_; }
    double dv() const { return dv_; }

    std::size_t num_x_cells() const { return num_x_; }   // nx^d (bounding box)
    std::size_t num_v_cells() const { return num_v_; }   // nv^d
    std::size_t num_cells() const { return num_x_ * num_v_; }

    /// Indices of x-cells whose center lies inside the domain (all cells on the torus).
    const std::vector<std::size_t>& inside_x() const { return inside_x_; }
    bool x_inside(std::size_t ix) const { return inside_mask_.empty() || inside_mask_[ix] != 0; }

    Vec x_center(std::size_t ix) const;
    Vec v_center(std::size_t iv) const;

    /// Cell of a continuous position; false when outside the box/domain.
    bool locate_x(const Vec& x, std::size_t& ix) const;
    bool locate_v(const Vec& v, std::size_t& iv) const;

    double w_x() const { return w_x_; }   // x-cell volume
    double w_v() const { return w_v_; }   // v-cell volume
    double w_cell() const { return w_x_ * w_v_; }

    /// Discrete Maxwellian table (renormalized); indexed by v-cell.
    const std::vector<double>& maxwellian_h() const { return maxw_h_; }
    double maxwellian_h(std::size_t iv) const { return maxw_h_[iv]; }

    /// Truncation mass defect 1 - sum w_v M(v_j) before renormalization.
    double mass_defect() const { return mass_defect_; }

    /// e^{-V(x_i)} table per x-cell and V(x_i) itself.
    const std::vector<double>& exp_neg_v() const { return exp_neg_v_; }
    const std::vector<double>& potential_values() const { return pot_values_; }
    void attach_potential(const PotentialSpec& pot);
    bool has_potential_tables() const { return !pot_values_.empty(); }

    Vec x_lo() const { return x_lo_; }

    // multi-index helpers
    void x_multi(std::size_t ix, int* out) const;
    void v_multi(std::size_t iv, int* out) const;
    std::size_t x_linear(const int* mi) const;
    std::size_t v_linear(const int* mi) const;

private:
    DomainSpec domain_;
    int nx_ = 0, nv_ = 0;
    double v_max_ = 0;
    double dx_ = 0, dv_ = 0;
    double w_x_ = 0, w_v_ = 0;
    std::size_t num_x_ = 0, num_v_ = 0;
    Vec x_lo_ = {0, 0};
    Vec x_hi_ = {0, 0};
    std::vector<char> inside_mask_;       // empty on the torus
    std::vector<std::size_t> inside_x_;
    std::vector<double> maxw_h_;
    double mass_defect_ = 0;
    std::vector<double> exp_neg_v_;
    std::vector<double> pot_values_;
};

/// Factory with the spec'd validity checks (nx,nv >= 4; mass defect <= 10%).
PhaseGrid build_grid(const DomainSpec& domain, double v_max, int nx, int nv);

} // namespace kinetic
