#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "geometry/domain.hpp"
#include "geometry/grid.hpp"
#include "geometry/potential.hpp"

namespace kinetic {

struct State {
    Vec x = {0, 0};
    Vec v = {0, 0};
    double t = 0;
    double energy0 = 0;  // hamiltonian recorded at trajectory start
};

enum class TraceStatus { Completed, CornerHit, GrazingHit, MaxReflections };

struct ReflectionEvent {
    double t = 0;
    Vec point = {0, 0};
    Vec v_in = {0, 0};
    Vec v_out = {0, 0};
};

struct TrajectoryRecord {
    std::vector<State> samples;
    std::vector<ReflectionEvent> reflections;
    TraceStatus status = TraceStatus::Completed;
    double max_energy_drift = 0;  // max_t |H(phi_t) - H_0|
};

/**
 * Velocity map a(v) of the generalized transport dx/dt = a(v); the kinetic
 * energy A(v) (with a = grad A) is what the conserved hamiltonian uses.
 */
struct VelocityMap {
    std::function<Vec(const Vec&, int)> a;        // a(v)
    std::function<double(const Vec&, int)> kin;   // A(v)
    const char* name = "identity";

    static VelocityMap identity();
    static VelocityMap relativistic();  // a(v) = v / sqrt(1+|v|^2)
};

struct TraceOptions {
    double sample_dt = 0;            // 0: record every step
    double bisect_tol = 1e-10;       // boundary event time tolerance
    double grazing_tol = 1e-8;       // |v.n| < tol*|v| aborts
    double corner_tol = 1e-8;        // distance to corner set
    long max_reflections = 1000000;
    bool backward = false;           // integrate phi_{-t}
    VelocityMap vmap = VelocityMap::identity();
};

/// Specular reflection v - 2(v.n)n. n must be unit length.
Vec reflect(const Vec& v, const Vec& n, int dim);

/// One Stormer-Verlet step of size h (kick-drift-kick; symplectic, order 2).
State flow_step(const State& s, const PotentialSpec& pot, const DomainSpec& dom, double h,
                const VelocityMap& vmap = VelocityMap::identity());

/**
 * Integrates the (broken) characteristics over [0,T] with step h, detecting
 * wall crossings by sign change of the boundary function and refining the hit
 * time by bisection. Pathological events terminate the record early with the
 * corresponding status; callers treat those trajectories as null-set samples.
 */
TrajectoryRecord trace(const State& start, const PotentialSpec& pot, const DomainSpec& dom,
                       double T, double h, const TraceOptions& opts = {});

/// Exact trap flow while the orbit stays where the potential is quadratic.
State closed_form_harmonic(const Vec& x, const Vec& v, const Vec& x0, double eps, double t, int dim);

/// Phase-space set membership used by hitting times and control queries.
using PhaseSetTest = std::function<bool(const Vec& x, const Vec& v)>;

struct HittingResult {
    std::optional<double> time;
    TraceStatus status = TraceStatus::Completed;
};

/// First time within [0,T_max] at which the trajectory enters the set (backward flow by default).
HittingResult hitting_time(const State& start, const PhaseSetTest& in_set, const PotentialSpec& pot,
                           const DomainSpec& dom, double T_max, double h, bool backward = true,
                           const TraceOptions& opts = {});

} // namespace kinetic
