#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "geometry/grid.hpp"

namespace kinetic {

/// Continuous Maxwellian M(v) = (2*pi)^{-d/2} exp(-|v|^2/2).
double maxwellian(const Vec& v, int dim);

/**
 * Spatial coefficient profile (sigma, alpha, beta, ...): continuous on the
 * domain closure, nonnegative.
 */
class Profile {
public:
    static Profile constant(double c);
    /// Plateau `height` at circle-distance <= r_inner from `center`, 0 beyond r_outer, linear ramp between.
    static Profile ball(const Vec& center, double r_inner, double r_outer, double height = 1.0);
    /// 1-D arc [lo,hi] on the first axis with linear ramps of width `ramp` inside the ends.
    static Profile interval(double lo, double hi, double ramp, double height = 1.0);

    double operator()(const Vec& x, const DomainSpec& dom) const;
    std::string describe() const;

private:
    enum class Kind { Constant, Ball, Interval } kind_ = Kind::Constant;
    double c_ = 0, r_in_ = 0, r_out_ = 0, height_ = 1, lo_ = 0, hi_ = 0, ramp_ = 0;
    Vec center_ = {0, 0};
};

/// Velocity factor of a separable kernel term.
using VelocityFn = std::function<double(const Vec&, int)>;

struct SeparableTerm {
    Profile s;        // spatial coefficient
    VelocityFn p;     // factor in the first (donor) velocity slot
    VelocityFn q;     // factor in the second (receiver) slot
    std::string name;
};

enum class KernelFamily {
    LinearRelaxation,  // k = sigma(x) M(v')            (E1')
    Factorized,        // k = sigma(x) k* M(v')         (E2*) with constant k*
    MultExample,       // k = [alpha(x) + psi(v)psi(v')] M(v')
    DegenerateV,       // k(v',v) = M(v') M(v)^2
    TwoClass,          // k = [alpha(x)phi phi' + beta(x)Psi Psi'] M(v')
    PhiZero,           // k = M(v) phi(v) phi(v'), phi(0)=0
    Tabulated,         // dense ktilde table, k = ktilde M(v)
    CustomSeparable,
};

/**
 * Declarative collision kernel k(x, v', v). The evaluator convention is
 * k(x, first, second): the loss frequency is b(x,v) = int k(x, v, v') dv'
 * and the gain integrates k(x, v', v) f(v') over v'.
 *
 * Built-in families all have the form ktilde(x,v',v) * M(v) with ktilde
 * symmetric in (v',v), so the discrete A2 identity cancels exactly on any
 * velocity grid.
 */
class KernelSpec {
public:
    static KernelSpec linear_relaxation(Profile sigma);
    static KernelSpec factorized(Profile sigma, double kstar_const);
    static KernelSpec mult_example(double alpha_height = 1.0, double psi_amp = 1.0);
    static KernelSpec degenerate_v();
    static KernelSpec two_class(Profile alpha, Profile beta, double amp = 1.0);
    static KernelSpec phi_zero(double amp = 1.0);
    /// Dense table ktilde[(ix*Nv + ia)*Nv + ib]; k = ktilde * M(v_b).
    static KernelSpec tabulated(std::vector<double> ktilde, int nx, int nv_total);
    static KernelSpec custom_separable(std::vector<SeparableTerm> terms, std::string name);

    KernelFamily family() const { return family_; }
    const std::string& name() const { return name_; }
    const std::vector<SeparableTerm>& terms() const { return terms_; }
    bool separable() const { return family_ != KernelFamily::Tabulated; }
    bool symmetric_ktilde() const { return symmetric_; }
    /// omega = omega_x x R^d for this family (E3'' structure).
    bool omega_factorizes() const;

    /// k(x, v_first, v_second) with the continuous Maxwellian factor.
    double eval(const Vec& x, const Vec& v_first, const Vec& v_second, const DomainSpec& dom, int dim) const;

    const std::vector<double>& table() const { return table_; }
    int table_nx() const { return table_nx_; }
    int table_nv() const { return table_nv_; }

private:
    KernelFamily family_ = KernelFamily::LinearRelaxation;
    std::string name_;
    std::vector<SeparableTerm> terms_;
    bool symmetric_ = true;
    std::vector<double> table_;
    int table_nx_ = 0, table_nv_ = 0;
};

struct KernelReport {
    std::string family;
    double a1_min_value = 0;          // most negative value scanned (>= 0 when A1 holds)
    double a2_residual = 0;           // max over grid of the discrete A2 integral
    bool a2_pass = false;
    double a3_value = 0;              // sup_x of the squared-kernel double integral
    double gain_norm_bound = 0;       // sqrt(a3_value)
    double a3p_lambda = 0;            // Theta(t) = lambda exp(t/4)
    double a3p_gamma = 0;             // the A3' weighted double integral
    bool a3p_pass = false;
    double max_b = 0;
    double sup_ktilde = 0;
};

/**
 * Kernel bound to a grid: precomputed factor tables and the collision
 * frequency, plus the collision/dissipation operators.
 *
 * apply/dissipation parallelize over x-slices; reductions are index-ordered
 * so results are reproducible at any fixed thread count.
 */
class BoundKernel {
public:
    BoundKernel(const KernelSpec& spec, const PhaseGrid& grid, const PotentialSpec& pot, int threads = 1);

    const KernelSpec& spec() const { return spec_; }
    const PhaseGrid& grid() const { return grid_; }

    /// b(x,v) = sum_j w_v k(x, v, v_j): exact quadrature identity at any (x,v).
    double b_continuous(const Vec& x, const Vec& v) const;
    double b_grid(std::size_t ix, std::size_t iv) const { return b_table_[ix * grid_.num_v_cells() + iv]; }
    const std::vector<double>& b_table() const { return b_table_; }
    double max_b() const { return max_b_; }

    /// C(f) = gain - loss on the whole field (size num_cells).
    void apply_collision(const std::vector<double>& f, std::vector<double>& out) const;
    /// Gain term alone: C+(f)(x,v) = sum w k(x,v',v) f(x,v').
    void apply_gain(const std::vector<double>& f, std::vector<double>& out) const;
    /// Symmetrized operator built from kbar = (ktilde + ktilde^T)/2.
    void symmetrized_apply(const std::vector<double>& f, std::vector<double>& out) const;
    double sup_kbar() const { return sup_kbar_; }

    /// D(f) via the manifestly nonnegative symmetric double sum.
    double dissipation(const std::vector<double>& f) const;
    /// Cross-check route: -2 <C(f), f>_{L2 weighted}.
    double dissipation_inner_product(const std::vector<double>& f) const;

    KernelReport validate(double a2_tol = 1e-10) const;

    int threads() const { return threads_; }

private:
    void gain_column(std::size_t ix, const double* fcol, double* gain) const;
    void gain_column_sym(std::size_t ix, const double* fcol, double* gain) const;
    double dissipation_column(std::size_t ix, const double* fcol) const;

    const KernelSpec spec_;
    const PhaseGrid& grid_;
    int threads_ = 1;

    // separable factor tables: per term, s over x-cells and p,q over v-cells
    struct TermTables {
        std::vector<double> s, p, q;
        double Qm = 0;  // sum_j w q(v_j) M(v_j)
        double Pm = 0;  // sum_j w p(v_j) M(v_j)
    };
    std::vector<TermTables> tt_;
    std::vector<double> maxw_;    // continuous M at v-nodes
    std::vector<double> b_table_;
    double max_b_ = 0;
    double sup_kbar_ = 0;
};

/// BGK equilibrium F(x,v) = phi(H(x,v)) with per-column density rho_F.
struct BgkEquilibrium {
    std::vector<double> F;       // per cell
    std::vector<double> rho_F;   // per x-cell
};

BgkEquilibrium build_bgk_equilibrium(const PhaseGrid& grid, const PotentialSpec& pot,
                                     const std::function<double(double)>& phi_of_h);

/// C_bgk(f) = sigma(x) ( (sum_j w f_j / rho_F) F - f ).
void bgk_apply(const Profile& sigma, const BgkEquilibrium& eq, const PhaseGrid& grid,
               const std::vector<double>& f, std::vector<double>& out);

/// D_bgk(f) >= 0 with d/dt ||f||^2_{1/F} = -D_bgk(f).
double bgk_dissipation(const Profile& sigma, const BgkEquilibrium& eq, const PhaseGrid& grid,
                       const std::vector<double>& f);

struct NondegeneracyReport {
    double worst_measure = 0;     // sup over sampled directions at the given eps
    double fitted_gamma = 0;      // slope of log measure vs log eps
    bool degenerate = false;      // measure does not vanish with eps
    std::vector<double> eps_sweep;
    std::vector<double> measures;
};

/// Monte Carlo check of Leb{ v : |a(v).xi| <= eps } <= C eps^gamma over the grid's velocity box.
NondegeneracyReport check_nondegeneracy(const std::function<Vec(const Vec&, int)>& a_map, int dim,
                                        double v_max, double eps, int n_samples, std::uint64_t seed);

} // namespace kinetic
