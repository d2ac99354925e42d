#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "control/control.hpp"
#include "kernels/kernels.hpp"

namespace kinetic {

// --- weighted norms (Banach space with weight e^V / M_h) -------------------

double weighted_norm2_sq(const std::vector<double>& f, const PhaseGrid& grid);
inline double weighted_norm2(const std::vector<double>& f, const PhaseGrid& grid) {
    return std::sqrt(weighted_norm2_sq(f, grid));
}
double weighted_norm_inf(const std::vector<double>& f, const PhaseGrid& grid);
double weighted_inner(const std::vector<double>& f, const std::vector<double>& g, const PhaseGrid& grid);
double field_mass(const std::vector<double>& f, const PhaseGrid& grid);

/// BGK energy norm ||f||^2 with weight 1/F.
double bgk_norm2_sq(const std::vector<double>& f, const BgkEquilibrium& eq, const PhaseGrid& grid);

// --- collision backends -----------------------------------------------------

struct CollisionBackend {
    std::function<void(const std::vector<double>&, std::vector<double>&)> apply;  // C(f)
    std::function<void(const std::vector<double>&, std::vector<double>&)> gain;   // gain term only
    std::function<double(const Vec&, const Vec&)> loss_rate;                      // b(x,v)
    std::function<double(const std::vector<double>&)> dissipation;
    double max_rate = 0;
    std::string name;
};

CollisionBackend collision_backend(const BoundKernel& kernel);
CollisionBackend bgk_backend(const Profile& sigma, const BgkEquilibrium& eq, const PhaseGrid& grid,
                             double sigma_max);

// --- time evolution ----------------------------------------------------------

enum class Scheme { Strang, DuhamelSL };
enum class Interp { Linear, Cubic, Spectral };

struct SolverOptions {
    Scheme scheme = Scheme::Strang;
    Interp interp = Interp::Linear;
    double dt = 1e-3;
    double T = 1.0;
    double output_dt = 0;      // 0: every 10 steps
    double flow_substep = 0;   // backtrace integrator step; 0: automatic
    double interp_safety = 1.0;
    int threads = 1;
    bool renormalize_mass = false;
    int snapshot_stride = 0;   // record a field snapshot every k output samples (0: none)
    int max_snapshots = 16;
};

struct EvolutionSeries {
    std::vector<double> t;
    std::vector<double> l2_dist;      // ||f - Pf0|| in the problem's energy norm
    std::vector<double> norm2_sq;     // ||f||^2 (full field) for the dissipation identity
    std::vector<double> mass;
    std::vector<double> dissipation;  // D(f) at sample times
    std::vector<double> linf;
    std::vector<double> min_value;
    std::vector<std::vector<double>> class_masses;  // per sample
    std::vector<std::pair<double, std::vector<double>>> snapshots;
    std::vector<double> final_field;
    double initial_mass = 0;
    double initial_norm2_sq = 0;
    std::string scheme_name, interp_name;
};

struct EvolveSetup {
    const PhaseGrid* grid = nullptr;
    const PotentialSpec* pot = nullptr;
    CollisionBackend collision;
    std::function<double(const std::vector<double>&)> norm2_sq;  // energy functional
    std::function<double(const std::vector<double>&)> norm_inf;
    std::vector<double> equilibrium;        // Pf0: distance target
    const ClassStructure* classes = nullptr;
};

/**
 * Evolves f0 over [0,T].
 *
 * strang: conservative midpoint collision half-step, semi-Lagrangian
 * transport pull-back (backward characteristic feet, precomputed once for the
 * autonomous flow), collision half-step.
 *
 * duhamel_sl: attenuated pull-back exp(-int b ds) f o phi_{-dt} plus one gain
 * quadrature per step at the half-step foot, mirroring the semigroup
 * representation of the transport+loss part.
 */
EvolutionSeries evolve(const std::vector<double>& f0, const EvolveSetup& setup, const SolverOptions& opts);

/// max_t |(E(t+2d)-E(t))/(2d) + D(t+d)| / E(0) over the series' sample triples.
double dissipation_residual(const EvolutionSeries& series);

/// Quadrature masses per class region U_j.
std::vector<double> class_masses(const std::vector<double>& f, const ClassStructure& classes,
                                 const PhaseGrid& grid);

// --- decay-rate analysis -----------------------------------------------------

struct DecayReport {
    double gamma = 0;             // exponential rate (log y vs t)
    double gamma_residual = 0;    // RMS fit residual / total log drop
    double poly_exponent = 0;     // p in (1+t)^{-p} (log y vs log(1+t))
    double poly_residual = 0;
    std::vector<double> window_rates;  // 5 sliding-window rates
    std::string verdict;               // exponential | polynomial-like | stalled
    double used_t_min = 0, used_t_max = 0;
};

DecayReport fit_decay(const std::vector<double>& t, const std::vector<double>& dist);
inline DecayReport fit_decay(const EvolutionSeries& s) { return fit_decay(s.t, s.l2_dist); }

// --- hitting-time survival -----------------------------------------------------

struct SurvivalOptions {
    int n_samples = 100000;
    std::vector<double> t_grid;
    Vec x_lo = {0, 0}, x_hi = {0, 0};   // sampling box
    Vec v_lo = {0, 0}, v_hi = {0, 0};
    double h = 1e-2;
    bool backward = true;
    std::uint64_t seed = 1;
};

struct SurvivalReport {
    std::vector<double> t;
    std::vector<double> survival;      // fraction with tau > t
    double slope = 0;                  // log survival vs log(1+t) on the decaying tail
    double sqrt_slope = 0;             // same fit on sqrt(survival) (norm proxy)
    std::size_t n_aborted = 0;
};

SurvivalReport tau_survival(const OmegaPartition& omega, const PhaseGrid& grid, const PotentialSpec& pot,
                            const SurvivalOptions& opts);

// --- observability ---------------------------------------------------------------

struct ObservabilityReport {
    double K = 0;                  // max over runs of ||f0||^2 / int_0^T D dt
    double gamma_from_K = 0;       // norm rate implied by the energy inequality
    int violations = 0;            // runs with int D = 0 but ||f0|| > 0
    std::vector<double> per_run_K;
};

ObservabilityReport observability_check(const std::vector<EvolutionSeries>& runs, double T);

} // namespace kinetic
