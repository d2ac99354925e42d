#include "geometry/grid.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace kinetic {

namespace {
const double kTwoPi = 6.28318530717958647692528676655900577;
}

PhaseGrid::PhaseGrid(const DomainSpec& domain, double v_max, int nx, int nv)
    : domain_(domain), nx_(nx), nv_(nv), v_max_(v_max) {
    const int d = domain_.dim();
    domain_.bounding_box(x_lo_, x_hi_);
    dx_ = (x_hi_[0] - x_lo_[0]) / nx_;
    if (d > 1 && std::abs((x_hi_[1] - x_lo_[1]) / nx_ - dx_) > 1e-12 * std::abs(dx_)) {
        // non-square bounding boxes keep per-axis spacing uniform by widening the box
        const double side = std::max(x_hi_[0] - x_lo_[0], x_hi_[1] - x_lo_[1]);
        for (int a = 0; a < 2; ++a) {
            const double mid = 0.5 * (x_lo_[a] + x_hi_[a]);
            x_lo_[a] = mid - 0.5 * side;
            x_hi_[a] = mid + 0.5 * side;
        }
        dx_ = side / nx_;
    }
    dv_ = 2.0 * v_max_ / nv_;

    num_x_ = 1;
    num_v_ = 1;
    for (int a = 0; a < d; ++a) {
        num_x_ *= static_cast<std::size_t>(nx_);
        num_v_ *= static_cast<std::size_t>(nv_);
    }
    w_x_ = std::pow(dx_, d);
    w_v_ = std::pow(dv_, d);

    if (domain_.bounded()) {
        inside_mask_.assign(num_x_, 0);
        for (std::size_t ix = 0; ix < num_x_; ++ix) {
            if (domain_.inside(x_center(ix))) {
                inside_mask_[ix] = 1;
                inside_x_.push_back(ix);
            }
        }
        if (inside_x_.empty()) throw ConfigError("grid resolution too coarse: no cell center inside the domain");
    } else {
        inside_x_.resize(num_x_);
        for (std::size_t ix = 0; ix < num_x_; ++ix) inside_x_[ix] = ix;
    }

    // discrete Maxwellian with exact renormalization
    maxw_h_.resize(num_v_);
    const double norm = std::pow(kTwoPi, -0.5 * d);
    double sum = 0.0;
    for (std::size_t iv = 0; iv < num_v_; ++iv) {
        const Vec v = v_center(iv);
        maxw_h_[iv] = norm * std::exp(-0.5 * norm2(v, d));
        sum += w_v_ * maxw_h_[iv];
    }
    mass_defect_ = 1.0 - sum;
    for (auto& m : maxw_h_) m /= sum;
}

void PhaseGrid::attach_potential(const PotentialSpec& pot) {
    pot_values_.resize(num_x_);
    exp_neg_v_.resize(num_x_);
    for (std::size_t ix = 0; ix < num_x_; ++ix) {
        const double v = x_inside(ix) ? pot.value(x_center(ix), domain_) : 0.0;
        pot_values_[ix] = v;
        exp_neg_v_[ix] = std::exp(-v);
    }
}

Vec PhaseGrid::x_center(std::size_t ix) const {
    if (dim() == 1) return {x_lo_[0] + (static_cast<double>(ix) + 0.5) * dx_, 0.0};
    const std::size_t i = ix / nx_, j = ix % nx_;
    return {x_lo_[0] + (static_cast<double>(i) + 0.5) * dx_,
            x_lo_[1] + (static_cast<double>(j) + 0.5) * dx_};
}

Vec PhaseGrid::v_center(std::size_t iv) const {
    if (dim() == 1) return {-v_max_ + (static_cast<double>(iv) + 0.5) * dv_, 0.0};
    const std::size_t i = iv / nv_, j = iv % nv_;
    return {-v_max_ + (static_cast<double>(i) + 0.5) * dv_,
            -v_max_ + (static_cast<double>(j) + 0.5) * dv_};
}

bool PhaseGrid::locate_x(const Vec& x, std::size_t& ix) const {
    const int d = dim();
    std::size_t lin = 0;
    for (int a = 0; a < d; ++a) {
        double t = (x[a] - x_lo_[a]) / dx_;
        if (domain_.kind() == DomainKind::Torus) {
            t -= std::floor(t / nx_) * nx_;
            if (t >= nx_) t = 0;
        }
        if (t < 0 || t >= nx_) return false;
        lin = lin * nx_ + static_cast<std::size_t>(t);
    }
    if (!inside_mask_.empty() && !inside_mask_[lin]) return false;
    ix = lin;
    return true;
}

bool PhaseGrid::locate_v(const Vec& v, std::size_t& iv) const {
    const int d = dim();
    std::size_t lin = 0;
    for (int a = 0; a < d; ++a) {
        const double t = (v[a] + v_max_) / dv_;
        if (t < 0 || t >= nv_) return false;
        lin = lin * nv_ + static_cast<std::size_t>(t);
    }
    iv = lin;
    return true;
}

void PhaseGrid::x_multi(std::size_t ix, int* out) const {
    if (dim() == 1) {
        out[0] = static_cast<int>(ix);
        return;
    }
    out[0] = static_cast<int>(ix / nx_);
    out[1] = static_cast<int>(ix % nx_);
}

void PhaseGrid::v_multi(std::size_t iv, int* out) const {
    if (dim() == 1) {
        out[0] = static_cast<int>(iv);
        return;
    }
    out[0] = static_cast<int>(iv / nv_);
    out[1] = static_cast<int>(iv % nv_);
}

std::size_t PhaseGrid::x_linear(const int* mi) const {
    return dim() == 1 ? static_cast<std::size_t>(mi[0])
                      : static_cast<std::size_t>(mi[0]) * nx_ + static_cast<std::size_t>(mi[1]);
}

std::size_t PhaseGrid::v_linear(const int* mi) const {
    return dim() == 1 ? static_cast<std::size_t>(mi[0])
                      : static_cast<std::size_t>(mi[0]) * nv_ + static_cast<std::size_t>(mi[1]);
}

PhaseGrid build_grid(const DomainSpec& domain, double v_max, int nx, int nv) {
    if (nx < 4 || nv < 4) throw ConfigError("grid needs nx, nv >= 4");
    if (!(v_max > 0)) throw ConfigError("v_max must be positive");
    PhaseGrid g(domain, v_max, nx, nv);
    if (g.mass_defect() > 0.10)
        throw ConfigError("velocity truncation too aggressive: Maxwellian mass defect " +
                          std::to_string(g.mass_defect()) + " exceeds 10%");
    return g;
}

} // namespace kinetic
