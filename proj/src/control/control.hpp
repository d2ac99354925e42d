#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flow/flow.hpp"
#include "kernels/kernels.hpp"

namespace kinetic {

/**
 * The set where collisions act: cells with b(x,v) > eps_omega, its
 * face-adjacency connected components and the position projection p_x(omega).
 */
struct OmegaPartition {
    double eps_omega = 0;
    std::vector<char> mask;                         // per phase cell
    std::vector<int> component;                     // -1 outside the mask
    int num_components = 0;
    std::vector<std::vector<std::size_t>> cells;    // per component
    std::vector<char> px_mask;                      // per x-cell
    double covered_fraction = 0;                    // measure fraction of the mask
    bool factorization_checked = false;             // omega == omega_x x v-box (E3'' families)

    bool contains(const PhaseGrid& g, const Vec& x, const Vec& v) const;
};

OmegaPartition extract_omega(const BoundKernel& kernel, double eps_rel = 1e-8);

/// Connected components of an arbitrary cell mask (shared by omega and reachable-set analysis).
int label_components(const PhaseGrid& grid, const std::vector<char>& mask, std::vector<int>& component);

struct GccOptions {
    double T = 200.0;                 // horizon (finite-T GCC) or T_max (a.e.i.t.)
    bool aeit = true;
    int n_samples = 10000;
    double h = 1e-3;
    std::uint64_t seed = 1;
    // optional sampling box restriction (position + velocity window)
    std::optional<Vec> x_lo, x_hi, v_lo, v_hi;
};

struct GccReport {
    double fraction = 0;          // controlled fraction at the full sample size
    double fraction_coarse = 0;   // at half the sample size (refinement trend)
    std::size_t n_samples = 0;
    std::size_t n_aborted = 0;    // null-set events, excluded from the denominator
    bool holds_sampled = false;   // fraction == 1 (finite-T mode)
    std::vector<State> worst;     // a few uncontrolled witnesses
};

GccReport check_gcc(const OmegaPartition& omega, const PhaseGrid& grid, const PotentialSpec& pot,
                    const GccOptions& opts);

struct LebeauOptions {
    double T = 1.0;
    int n_samples = 2000;
    int refine_steps = 120;       // Nelder-Mead iterations per candidate
    int refine_candidates = 10;
    double h = 1e-3;
    std::uint64_t seed = 1;
};

struct LebeauEstimate {
    double T = 0;
    double c_minus = 0;           // upper bound for the infimum (sampled + refined)
    double c_plus = 0;            // lower bound for the supremum
    State argmin, argmax;
    int n_samples = 0;
    std::vector<double> refine_trace;  // best minimum after each refinement stage
};

LebeauEstimate lebeau_constant(const BoundKernel& kernel, const PotentialSpec& pot,
                               const LebeauOptions& opts);

struct ClassOptions {
    double T_reach = 50.0;        // backward-trace horizon for the reachable set
    double T_rphi = 50.0;         // horizon for R_phi witness search
    int rphi_seeds_per_component = 32;
    std::size_t reach_seed_budget = 4096;
    std::size_t rk_pair_budget = 200000;   // per x-column pair scan cap
    double h = 0;                 // 0: auto from grid spacing
    std::uint64_t seed = 1;
};

struct RPhiWitness {
    int a = 0, b = 0;
    State seed;
    double t = 0;
    bool backward = false;
};
struct RKWitness {
    int a = 0, b = 0;
    Vec x = {0, 0};
    Vec v1 = {0, 0};
    Vec v2 = {0, 0};
    double k_value = 0;
};

/**
 * Equivalence-class structure: R_phi/R_k edges between omega components close
 * into the join relation; the same machinery applied to the components of the
 * backward-reachable set gives the companion relation, whose class count must
 * agree (the two quotients are in bijection).
 */
struct ClassStructure {
    OmegaPartition omega;
    std::vector<RPhiWitness> rphi_edges;
    std::vector<RKWitness> rk_edges;
    std::vector<int> class_of_component;
    int num_classes = 0;

    std::vector<char> reach_mask;
    std::vector<int> reach_component;
    int num_reach_components = 0;
    std::vector<int> class_of_reach_component;
    int num_reach_classes = 0;
    std::vector<std::vector<std::size_t>> class_regions;   // U_j: cells per reach-class
    double aeit_fraction = 0;                              // measure fraction of the reachable set
    bool counts_match = false;
    bool inconclusive = false;                             // class count unstable under budget halving
};

ClassStructure build_classes(const BoundKernel& kernel, const OmegaPartition& omega,
                             const PotentialSpec& pot, const ClassOptions& opts);

/// Normalized stationary fields f_j = 1_{U_j} e^{-V} M_h / ||.||.
std::vector<std::vector<double>> stationary_basis(const ClassStructure& classes, const PhaseGrid& grid);

/// P f0 = sum_j (int_{U_j} f0 / ||1_{U_j} e^{-V} M_h||) f_j.
std::vector<double> project_equilibrium(const std::vector<double>& f0, const ClassStructure& classes,
                                        const PhaseGrid& grid);

/// Single-class projection onto the global Maxwellian equilibrium e^{-V} M_h.
std::vector<double> project_global_maxwellian(const std::vector<double>& f0, const PhaseGrid& grid);

} // namespace kinetic
