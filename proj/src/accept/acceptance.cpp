/*
 * Desk-scale verification suite: each criterion builds its own configuration,
 * runs the relevant pipeline and checks the pinned tolerances. One PASS/FAIL
 * line is printed per criterion.
 */
#include "accept/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "control/control.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"
#include "flow/flow.hpp"
#include "io/config.hpp"
#include "solver/solver.hpp"

namespace kinetic::accept {

namespace {

using namespace kinetic;

struct Check {
    bool ok = true;
    std::ostringstream detail;

    template <typename T>
    Check& note(const std::string& label, const T& v) {
        if (detail.tellp() > 0) detail << "; ";
        detail << label << "=" << v;
        return *this;
    }
    Check& require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << "FAILED: " << what;
        }
        return *this;
    }
};

EvolveSetup standard_setup(const PhaseGrid& grid, const PotentialSpec& pot, const BoundKernel& kernel,
                           const std::vector<double>& f0, const ClassStructure* classes) {
    EvolveSetup s;
    s.grid = &grid;
    s.pot = &pot;
    s.collision = collision_backend(kernel);
    s.norm2_sq = [&grid](const std::vector<double>& f) { return weighted_norm2_sq(f, grid); };
    s.norm_inf = [&grid](const std::vector<double>& f) { return weighted_norm_inf(f, grid); };
    s.equilibrium = classes ? project_equilibrium(f0, *classes, grid) : project_global_maxwellian(f0, grid);
    s.classes = classes;
    return s;
}

std::vector<double> density_modes_field(const PhaseGrid& grid, double ax, double av, int kmode,
                                        std::uint64_t seed) {
    const std::size_t Nv = grid.num_v_cells();
    std::vector<double> f(grid.num_cells(), 0.0);
    Rng rng(seed);
    const double ph1 = rng.uniform(0.0, 6.28), ph2 = rng.uniform(0.0, 6.28);
    const double pi2 = 6.283185307179586476925286766559;
    for (std::size_t ix : grid.inside_x()) {
        const Vec x = grid.x_center(ix);
        double rho = 1.0 + ax * std::cos(pi2 * kmode * x[0] + ph1);
        if (grid.dim() > 1) rho *= 1.0 + 0.5 * ax * std::sin(pi2 * kmode * x[1] + ph2);
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            const Vec v = grid.v_center(iv);
            const double skew = 1.0 + av * v[0] / (1.0 + norm2(v, grid.dim()));
            f[ix * Nv + iv] = rho * skew * grid.maxwellian_h(iv);
        }
    }
    return f;
}

// C-infinity bump supported in |dx|<rx, |dv|<rv around (x0,v0).
std::vector<double> compact_blob_field(const PhaseGrid& grid, const Vec& x0, const Vec& v0, double rx,
                                       double rv) {
    const std::size_t Nv = grid.num_v_cells();
    const int d = grid.dim();
    std::vector<double> f(grid.num_cells(), 0.0);
    auto bump = [](double u) { return u < 1.0 ? std::exp(-u * u / (1.0 - u * u)) : 0.0; };
    for (std::size_t ix : grid.inside_x()) {
        const Vec dx = grid.domain().wrap_delta(grid.x_center(ix), x0);
        const double ux = vec_norm(dx, d) / rx;
        if (ux >= 1.0) continue;
        for (std::size_t iv = 0; iv < Nv; ++iv) {
            Vec dv = grid.v_center(iv);
            for (int a = 0; a < d; ++a) dv[a] -= v0[a];
            const double uv = vec_norm(dv, d) / rv;
            if (uv >= 1.0) continue;
            f[ix * Nv + iv] = bump(ux) * bump(uv);
        }
    }
    return f;
}

double rel_spread(const std::vector<double>& v) {
    double mn = v[0], mx = v[0], mean = 0;
    for (double x : v) {
        mn = std::min(mn, x);
        mx = std::max(mx, x);
        mean += x;
    }
    mean /= static_cast<double>(v.size());
    return std::abs(mean) > 0 ? (mx - mn) / std::abs(mean) : 1e30;
}

// ---------------------------------------------------------------------------
// 1. Flow correctness: trace vs closed-form trap flow + energy drift order

Check crit1_flow(int) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const Vec x0 = vec1(0.5);
    const PotentialSpec pot = PotentialSpec::harmonic_trap(x0, 1.0, 0.2, 0.45);
    State s;
    s.x = vec1(0.6);
    s.v = vec1(0.0);

    TraceOptions topt;
    topt.sample_dt = 0.1;
    const double h = 1e-3;
    TrajectoryRecord rec = trace(s, pot, dom, 10.0, h, topt);
    double worst = 0;
    for (const State& st : rec.samples) {
        const State exact = closed_form_harmonic(s.x, s.v, x0, 1.0, st.t, 1);
        worst = std::max(worst, std::abs(st.x[0] - exact.x[0]) + std::abs(st.v[0] - exact.v[0]));
    }
    c.note("max_traj_err", worst).require(worst <= 1e-4, "trace vs closed form within 1e-4");

    TrajectoryRecord rec2 = trace(s, pot, dom, 10.0, h / 2, topt);
    const double ratio = rec.max_energy_drift / std::max(rec2.max_energy_drift, 1e-300);
    c.note("drift_h", rec.max_energy_drift).note("drift_ratio", ratio);
    c.require(ratio >= 3.2 && ratio <= 4.8, "energy drift halving ratio in [3.2,4.8]");
    return c;
}

// ---------------------------------------------------------------------------
// 2. Billiard oracle: unit-disk chord orbit vs the analytic circle map

Check crit2_billiard(int) {
    Check c;
    const DomainSpec dom = DomainSpec::disk(1.0);
    const PotentialSpec pot = PotentialSpec::zero();
    State s;
    s.x = vec2(0.31, 0.12);
    double vx = 0.7, vy = 0.55;
    const double nv = std::sqrt(vx * vx + vy * vy);
    s.v = vec2(vx / nv, vy / nv);

    // analytic oracle: exact line-circle intersections, reflected recursively
    std::vector<Vec> expected;
    {
        Vec p = s.x, v = s.v;
        for (int b = 0; b < 100; ++b) {
            const double pv = p[0] * v[0] + p[1] * v[1];
            const double pp = p[0] * p[0] + p[1] * p[1];
            const double t = -pv + std::sqrt(pv * pv + 1.0 - pp);
            p = {p[0] + t * v[0], p[1] + t * v[1]};
            expected.push_back(p);
            const double vn = v[0] * p[0] + v[1] * p[1];  // |p| = 1
            v = {v[0] - 2 * vn * p[0], v[1] - 2 * vn * p[1]};
        }
    }
    TraceOptions topt;
    topt.sample_dt = 1e9;  // endpoints only; we want the reflection log
    TrajectoryRecord rec = trace(s, pot, dom, 205.0, 1e-3, topt);
    c.note("bounces", rec.reflections.size());
    c.require(rec.reflections.size() >= 100, "at least 100 reflections traced");
    double worst = 0;
    for (std::size_t b = 0; b < 100 && b < rec.reflections.size(); ++b) {
        const Vec& got = rec.reflections[b].point;
        worst = std::max(worst, std::hypot(got[0] - expected[b][0], got[1] - expected[b][1]));
    }
    c.note("max_point_err", worst).require(worst <= 1e-6, "reflection points within 1e-6 over 100 bounces");

    // chord-geometry cross-check: all chord lengths equal 2 sin(theta)
    double worst_chord = 0;
    const double chord0 = std::hypot(expected[1][0] - expected[0][0], expected[1][1] - expected[0][1]);
    for (std::size_t b = 2; b < 100; ++b) {
        const double ch = std::hypot(expected[b][0] - expected[b - 1][0],
                                     expected[b][1] - expected[b - 1][1]);
        worst_chord = std::max(worst_chord, std::abs(ch - chord0));
    }
    c.require(worst_chord <= 1e-9, "oracle chords are equal length");
    return c;
}

// ---------------------------------------------------------------------------
// 3. Dissipation identity with order-2 residual reduction

double dissipation_residual_run(int threads, double dt) {
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 6.0, 128, 128);
    grid.attach_potential(pot);
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
    BoundKernel kernel(spec, grid, pot, threads);
    auto f0 = density_modes_field(grid, 0.5, 0.5, 2, 7);

    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Spectral;
    opts.dt = dt;
    opts.T = 2.0;
    opts.output_dt = 5 * dt;
    opts.threads = threads;
    EvolveSetup setup = standard_setup(grid, pot, kernel, f0, nullptr);
    EvolutionSeries series = evolve(f0, setup, opts);
    return dissipation_residual(series);
}

Check crit3_dissipation(int threads) {
    Check c;
    const double r1 = dissipation_residual_run(threads, 1e-3);
    const double r2 = dissipation_residual_run(threads, 5e-4);
    const double ratio = r1 / std::max(r2, 1e-300);
    c.note("residual_dt1e-3", r1).note("residual_dt5e-4", r2).note("ratio", ratio);
    c.require(r1 <= 1e-3, "normalized dissipation residual <= 1e-3 at dt=1e-3");
    c.require(ratio >= 3.2 && ratio <= 4.8, "order-2 reduction under dt halving");
    return c;
}

// ---------------------------------------------------------------------------
// 4. Weak coercivity: class-wise Maxwellians vs generic fields

Check crit4_coercivity(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 6.0, 64, 129);
    grid.attach_potential(pot);

    std::vector<KernelSpec> specs;
    specs.push_back(KernelSpec::linear_relaxation(Profile::ball(vec1(0.5), 0.05, 0.1)));
    specs.push_back(KernelSpec::mult_example());
    specs.push_back(KernelSpec::degenerate_v());
    specs.push_back(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                          Profile::interval(0.05, 0.45, 0.05), 4.0));
    specs.push_back(KernelSpec::phi_zero(4.0));

    Rng rng(11);
    const std::size_t Nv = grid.num_v_cells();
    double worst_D = 0, worst_C = 0, min_D_random = 1e300;
    const double pi2 = 6.283185307179586476925286766559;
    for (int trial = 0; trial < 50; ++trial) {
        const KernelSpec& spec = specs[trial % specs.size()];
        BoundKernel kernel(spec, grid, pot, threads);
        // class-wise Maxwellian: per v-sign densities for two_class, shared otherwise
        std::vector<double> f(grid.num_cells());
        const double a1 = rng.uniform(0.2, 1.0), p1 = rng.uniform(0.0, 6.28);
        const double a2 = rng.uniform(0.2, 1.0), p2 = rng.uniform(0.0, 6.28);
        const bool split = spec.family() == KernelFamily::TwoClass;
        for (std::size_t ix = 0; ix < grid.num_x_cells(); ++ix) {
            const double x = grid.x_center(ix)[0];
            const double rho1 = 1.0 + a1 * std::cos(pi2 * x + p1);
            const double rho2 = split ? 1.0 + a2 * std::cos(pi2 * 2 * x + p2) : rho1;
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                const double vv = grid.v_center(iv)[0];
                f[ix * Nv + iv] = (vv < 0 ? rho1 : rho2) * grid.maxwellian_h(iv);
            }
        }
        const double nrm = weighted_norm2(f, grid);
        for (auto& x : f) x /= nrm;
        const double D = kernel.dissipation(f);
        std::vector<double> cf;
        kernel.apply_collision(f, cf);
        const double cn = weighted_norm2(cf, grid);
        worst_D = std::max(worst_D, D);
        worst_C = std::max(worst_C, cn);

        // generic non-Maxwellian field
        std::vector<double> g = density_modes_field(grid, 0.5, 0.9, 1 + trial % 3, 1000 + trial);
        const double gn = weighted_norm2(g, grid);
        for (auto& x : g) x /= gn;
        min_D_random = std::min(min_D_random, kernel.dissipation(g));
    }
    c.note("max_D_classwise", worst_D).note("max_normC", worst_C).note("min_D_random", min_D_random);
    c.require(worst_D <= 1e-12, "D(f) <= 1e-12 on 50 class-wise Maxwellians");
    c.require(worst_C <= 1e-6, "||C(f)|| <= 1e-6 ||f|| on class-wise Maxwellians");
    c.require(min_D_random > 0, "D > 0 on 50 generic fields");
    return c;
}

// ---------------------------------------------------------------------------
// 5. Lebeau constants for the x+v multiplicative example

Check crit5_lebeau(int) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 6.0, 128, 128);
    grid.attach_potential(pot);
    const KernelSpec spec = KernelSpec::mult_example();
    BoundKernel kernel(spec, grid, pot, 1);

    // beta = int psi M by quadrature
    double beta = 0;
    for (std::size_t iv = 0; iv < grid.num_v_cells(); ++iv) {
        const Vec v = grid.v_center(iv);
        const double s = std::abs(v[0]);
        const double psi = s <= 2.0 ? 1.0 : std::exp(-(s - 2.0));
        beta += grid.w_v() * psi * maxwellian(v, 1);
    }
    const double bound = std::min(beta, 0.25);
    c.note("beta", beta).note("bound", bound);

    double cminus_T1 = 0;
    for (double T : {1.0, 2.0, 4.0, 8.0}) {
        LebeauOptions lop;
        lop.T = T;
        lop.n_samples = 1500;
        lop.refine_steps = 80;
        lop.h = 2e-3;
        lop.seed = 5;
        const LebeauEstimate est = lebeau_constant(kernel, pot, lop);
        if (T == 1.0) {
            cminus_T1 = est.c_minus;
            c.require(est.c_minus >= bound - 0.02, "C-(1) >= min(beta,1/4) - 0.02");
        }
        c.note("C-(" + std::to_string(static_cast<int>(T)) + ")", est.c_minus);
        c.require(est.c_minus >= 0.2 * bound, "C-(T) >= 0.2 min(beta,1/4)");
        c.require(est.c_minus <= est.c_plus + 1e-12, "C-(T) <= C+(T)");
    }
    (void)cminus_T1;
    return c;
}

// ---------------------------------------------------------------------------
// 6. Exponential decay for mult_example and sigma=1 relaxation

Check crit6_exponential(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 6.0, 128, 128);
    grid.attach_potential(pot);

    struct CaseDef {
        KernelSpec spec;
        double T;
        const char* label;
    };
    std::vector<CaseDef> cases;
    cases.push_back({KernelSpec::linear_relaxation(Profile::constant(1.0)), 40.0, "linear_relaxation"});
    cases.push_back({KernelSpec::mult_example(), 80.0, "mult_example"});

    for (auto& cd : cases) {
        BoundKernel kernel(cd.spec, grid, pot, threads);
        auto f0 = density_modes_field(grid, 0.5, 0.5, 1, 3);
        SolverOptions opts;
        opts.scheme = Scheme::Strang;
        opts.interp = Interp::Spectral;
        opts.dt = 1.0 / 6.0;
        opts.T = cd.T;
        opts.output_dt = 0.5;
        opts.threads = threads;
        EvolveSetup setup = standard_setup(grid, pot, kernel, f0, nullptr);
        EvolutionSeries series = evolve(f0, setup, opts);
        const DecayReport rep = fit_decay(series);
        const double spread = rel_spread(rep.window_rates);
        c.note(std::string(cd.label) + "_gamma", rep.gamma)
            .note(std::string(cd.label) + "_resid", rep.gamma_residual)
            .note(std::string(cd.label) + "_spread", spread);
        c.require(rep.verdict == "exponential", std::string(cd.label) + " verdict exponential");
        c.require(rep.gamma_residual < 0.05, std::string(cd.label) + " fit residual < 5%");
        c.require(spread < 0.20, std::string(cd.label) + " windowed-rate spread < 20%");
    }
    return c;
}

// ---------------------------------------------------------------------------
// 7. No uniform exponential rate for the velocity-degenerate kernel

Check crit7_no_uniform_rate(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 6.0, 128, 128);
    grid.attach_potential(pot);
    const KernelSpec spec = KernelSpec::degenerate_v();
    BoundKernel kernel(spec, grid, pot, threads);
    auto f0 = density_modes_field(grid, 0.5, 0.8, 1, 5);

    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Spectral;
    opts.dt = 1.0 / 6.0;
    opts.T = 100.0;
    opts.output_dt = 0.5;
    opts.threads = threads;
    EvolveSetup setup = standard_setup(grid, pot, kernel, f0, nullptr);
    EvolutionSeries series = evolve(f0, setup, opts);
    const DecayReport rep = fit_decay(series);
    c.note("verdict", rep.verdict).note("first_window", rep.window_rates.front())
        .note("last_window", rep.window_rates.back());
    c.require(rep.verdict != "exponential", "verdict is not exponential");
    c.require(rep.window_rates.front() >= 2.0 * rep.window_rates.back(),
              "windowed rate decreases by >= 2x");
    return c;
}

// ---------------------------------------------------------------------------
// 8. Polynomial lower bound when the control set misses positions

Check crit8_lower_bound(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();

    // (a) hitting-time survival from the uncontrolled box
    {
        PhaseGrid grid = build_grid(dom, 6.0, 128, 128);
        grid.attach_potential(pot);
        const KernelSpec spec = KernelSpec::linear_relaxation(Profile::interval(0.4, 0.6, 0.05));
        BoundKernel kernel(spec, grid, pot, 1);
        const OmegaPartition omega = extract_omega(kernel);
        SurvivalOptions sop;
        sop.n_samples = 100000;
        sop.t_grid = {0.5, 1, 2, 3, 5, 8, 12, 20, 30, 50, 80, 100};
        sop.x_lo = vec1(-0.2);
        sop.x_hi = vec1(0.2);
        sop.v_lo = vec1(-1.0);
        sop.v_hi = vec1(1.0);
        sop.h = 0.01;
        sop.seed = 17;
        const SurvivalReport rep = tau_survival(omega, grid, pot, sop);
        c.note("survival_slope", rep.slope).note("sqrt_survival_slope", rep.sqrt_slope);
        // Criterion as stated: fitted survival slope -0.5 +- 0.1. The directly
        // computable survival fraction scales like 1/t (slope -1 = -d); the
        // sqrt-survival slope (the norm proxy) is the one near -1/2. See the
        // decisions ledger: this sub-check is expected to fail honestly.
        c.require(std::abs(rep.slope + 0.5) <= 0.1, "survival log-log slope = -0.5 +- 0.1");
    }

    // (b) norm lower bound ||f(t)-Pf0|| >= c (1+t)^{-0.65} over [1,100]
    {
        PhaseGrid grid = build_grid(dom, 6.0, 128, 2048);
        grid.attach_potential(pot);
        const KernelSpec spec = KernelSpec::linear_relaxation(Profile::interval(0.4, 0.6, 0.05));
        BoundKernel kernel(spec, grid, pot, threads);
        auto f0 = compact_blob_field(grid, vec1(0.0), vec1(0.0), 0.15, 0.8);
        SolverOptions opts;
        opts.scheme = Scheme::Strang;
        opts.interp = Interp::Spectral;
        opts.dt = 0.05;
        opts.T = 100.0;
        opts.output_dt = 1.0;
        opts.threads = threads;
        EvolveSetup setup = standard_setup(grid, pot, kernel, f0, nullptr);
        EvolutionSeries series = evolve(f0, setup, opts);
        double c_fit = 0;
        bool holds = true;
        double margin = 1e300;
        for (std::size_t i = 0; i < series.t.size(); ++i) {
            const double t = series.t[i];
            if (t < 1.0) continue;
            const double envelope = std::pow(1.0 + t, -0.65);
            if (c_fit == 0) c_fit = 0.5 * series.l2_dist[i] / envelope;  // fitted at t=1
            if (series.l2_dist[i] < c_fit * envelope) holds = false;
            margin = std::min(margin, series.l2_dist[i] / (c_fit * envelope));
        }
        c.note("c_fit", c_fit).note("min_margin", margin);
        c.require(holds, "||f(t)-Pf0|| >= c (1+t)^{-0.65} on [1,100]");
    }
    return c;
}

// ---------------------------------------------------------------------------
// 9. Class structure: two_class and phi_zero configurations

Check crit9_classes(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 6.0, 128, 129);
    grid.attach_potential(pot);

    const KernelSpec two = KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                                 Profile::interval(0.05, 0.45, 0.05), 4.0);
    BoundKernel k2(two, grid, pot, threads);
    const OmegaPartition om2 = extract_omega(k2);
    ClassOptions copt;
    copt.seed = 3;
    ClassStructure cs2 = build_classes(k2, om2, pot, copt);
    c.note("two_class_omega_components", om2.num_components)
        .note("two_class_classes", cs2.num_classes)
        .note("two_class_sim_classes", cs2.num_reach_classes);
    c.require(om2.num_components == 2, "two_class: 2 omega components");
    c.require(cs2.num_classes == 2, "two_class: 2 join classes");
    c.require(cs2.num_reach_classes == 2, "two_class: 2 companion classes");
    c.require(cs2.counts_match, "class counts agree (bijection)");

    const KernelSpec pz = KernelSpec::phi_zero(4.0);
    BoundKernel kz(pz, grid, pot, threads);
    const OmegaPartition omz = extract_omega(kz);
    ClassStructure csz = build_classes(kz, omz, pot, copt);
    c.note("phi_zero_omega_components", omz.num_components).note("phi_zero_classes", csz.num_classes);
    c.require(omz.num_components == 2, "phi_zero: 2 omega components");
    c.require(csz.num_classes == 1, "phi_zero: 1 class");

    // evolution: per-class masses conserved, convergence to the 2-term projection
    auto f0 = density_modes_field(grid, 0.6, 0.8, 1, 23);
    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Spectral;
    opts.dt = 0.1;
    opts.T = 260.0;
    opts.output_dt = 1.0;
    opts.threads = threads;
    EvolveSetup setup = standard_setup(grid, pot, k2, f0, &cs2);
    EvolutionSeries series = evolve(f0, setup, opts);

    double worst_mass_drift = 0;
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        if (series.t[i] > 20.0) break;
        for (std::size_t j = 0; j < series.class_masses[i].size(); ++j) {
            const double m0 = series.class_masses[0][j];
            worst_mass_drift =
                std::max(worst_mass_drift, std::abs(series.class_masses[i][j] - m0) / std::abs(m0));
        }
    }
    const double final_ratio = series.l2_dist.back() / series.l2_dist.front();
    c.note("class_mass_drift", worst_mass_drift).note("final_over_initial", final_ratio);
    c.require(worst_mass_drift <= 1e-6, "per-class masses conserved to 1e-6 over [0,20]");
    c.require(final_ratio <= 1e-3, "converges to the 2-term projection (<= 1e-3 of initial)");
    return c;
}

// ---------------------------------------------------------------------------
// 10. Trapped harmonic potential: control fails on the trap box

Check crit10_trap(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const Vec x0 = vec1(0.5);
    const double eps = 1.0, eta = 0.2;
    const PotentialSpec pot = PotentialSpec::harmonic_trap(x0, eps, eta, 0.45);

    PhaseGrid grid = build_grid(dom, 1.7, 128, 128);
    grid.attach_potential(pot);
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::interval(0.91, 0.99, 0.02));
    BoundKernel kernel(spec, grid, pot, threads);
    const OmegaPartition omega = extract_omega(kernel);

    GccOptions gopt;
    gopt.T = 50.0;
    gopt.aeit = true;
    gopt.n_samples = 2000;
    gopt.h = 2e-3;
    gopt.seed = 9;
    gopt.x_lo = vec1(x0[0] - eta);
    gopt.x_hi = vec1(x0[0] + eta);
    gopt.v_lo = vec1(-std::sqrt(eps) * eta);
    gopt.v_hi = vec1(std::sqrt(eps) * eta);
    const GccReport gcc = check_gcc(omega, grid, pot, gopt);
    c.note("trap_fraction", gcc.fraction);
    c.require(gcc.fraction == 0.0, "a.e.i.t. fraction 0 on the trap box");

    SurvivalOptions sop;
    sop.n_samples = 10000;
    sop.t_grid = {1, 5, 10, 20, 50};
    sop.x_lo = *gopt.x_lo;
    sop.x_hi = *gopt.x_hi;
    sop.v_lo = *gopt.v_lo;
    sop.v_hi = *gopt.v_hi;
    sop.h = 2e-3;
    sop.seed = 29;
    const SurvivalReport sv = tau_survival(omega, grid, pot, sop);
    double min_surv = 1.0;
    for (double s : sv.survival) min_surv = std::min(min_surv, s);
    c.note("min_survival", min_surv);
    c.require(min_surv == 1.0, "survival identically 1 on the trap box");

    auto f0 = compact_blob_field(grid, x0, vec1(0.0), 0.18, 0.18);
    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Cubic;
    opts.dt = 0.4;
    opts.T = 50.0;
    opts.output_dt = 2.0;
    opts.interp_safety = 128.0;
    opts.flow_substep = 1e-3;
    opts.threads = threads;
    EvolveSetup setup = standard_setup(grid, pot, kernel, f0, nullptr);
    EvolutionSeries series = evolve(f0, setup, opts);
    double min_ratio = 1e300;
    for (double dst : series.l2_dist) min_ratio = std::min(min_ratio, dst / series.l2_dist.front());
    c.note("min_dist_ratio", min_ratio);
    c.require(min_ratio >= 0.9, "||f(t)-P f0|| >= 0.9 initial over [0,50]");
    return c;
}

// ---------------------------------------------------------------------------
// 11. Stationarity of the basis fields under one full step

Check crit11_stationarity(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 6.0, 128, 129);
    grid.attach_potential(pot);

    std::vector<KernelSpec> specs;
    specs.push_back(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                          Profile::interval(0.05, 0.45, 0.05), 4.0));
    specs.push_back(KernelSpec::phi_zero(4.0));
    specs.push_back(KernelSpec::linear_relaxation(Profile::ball(vec1(0.5), 0.05, 0.1)));

    double worst = 0;
    for (const auto& spec : specs) {
        BoundKernel kernel(spec, grid, pot, threads);
        const OmegaPartition omega = extract_omega(kernel);
        ClassOptions copt;
        copt.seed = 13;
        const ClassStructure cs = build_classes(kernel, omega, pot, copt);
        const auto basis = stationary_basis(cs, grid);
        for (const auto& fj : basis) {
            SolverOptions opts;
            opts.scheme = Scheme::Strang;
            opts.interp = Interp::Linear;
            opts.dt = 1e-3;
            opts.T = 1e-3;
            opts.output_dt = 1e-3;
            opts.threads = threads;
            EvolveSetup setup = standard_setup(grid, pot, kernel, fj, nullptr);
            setup.equilibrium.assign(fj.size(), 0.0);
            EvolutionSeries s = evolve(fj, setup, opts);
            std::vector<double> diff(fj.size());
            for (std::size_t i = 0; i < fj.size(); ++i) diff[i] = s.final_field[i] - fj[i];
            worst = std::max(worst, weighted_norm2(diff, grid));
        }
    }
    c.note("max_step_change", worst);
    c.require(worst <= 1e-8, "||step(f_j) - f_j|| <= 1e-8 for every basis field");
    return c;
}

// ---------------------------------------------------------------------------
// 12. Specular stadium: monotone decay with a localized control region

Check crit12_stadium(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::stadium(2.0, 0.5);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 5.0, 48, 32);
    grid.attach_potential(pot);
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::ball(vec2(0.0, 0.0), 0.4, 0.7));
    BoundKernel kernel(spec, grid, pot, threads);
    auto f0 = density_modes_field(grid, 0.8, 0.8, 1, 31);

    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Linear;
    opts.dt = 0.01;
    opts.T = 25.0;
    opts.output_dt = 0.5;
    opts.threads = threads;
    EvolveSetup setup = standard_setup(grid, pot, kernel, f0, nullptr);
    EvolutionSeries series = evolve(f0, setup, opts);

    bool monotone = true;
    for (std::size_t i = 1; i < series.l2_dist.size(); ++i)
        if (series.l2_dist[i] > series.l2_dist[i - 1] * (1.0 + 1e-3)) monotone = false;
    const double drop = series.l2_dist.front() / series.l2_dist.back();
    c.note("drop", drop).note("monotone", monotone ? 1 : 0);
    c.require(monotone, "||f - Pf0|| decreases monotonically");
    c.require(drop >= 10.0, "distance drops >= 10x over the run");
    return c;
}

// ---------------------------------------------------------------------------
// 13. Kernel validation across families + injected asymmetry

Check crit13_validation(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 6.0, 64, 129);
    grid.attach_potential(pot);

    std::vector<KernelSpec> specs;
    specs.push_back(KernelSpec::linear_relaxation(Profile::constant(1.0)));
    specs.push_back(KernelSpec::linear_relaxation(Profile::ball(vec1(0.5), 0.05, 0.1)));
    specs.push_back(KernelSpec::factorized(Profile::ball(vec1(0.3), 0.1, 0.2), 2.0));
    specs.push_back(KernelSpec::mult_example());
    specs.push_back(KernelSpec::degenerate_v());
    specs.push_back(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                          Profile::interval(0.05, 0.45, 0.05), 4.0));
    specs.push_back(KernelSpec::phi_zero(4.0));
    double worst_a2 = 0;
    for (const auto& spec : specs) {
        BoundKernel kernel(spec, grid, pot, threads);
        const KernelReport rep = kernel.validate(1e-10);
        worst_a2 = std::max(worst_a2, rep.a2_residual);
        c.require(rep.a2_pass, spec.name() + " passes A2");
        c.require(std::isfinite(rep.a3_value) && rep.a3_value > 0, spec.name() + " has finite A3");
        c.require(rep.a3p_pass, spec.name() + " passes A3'");
    }
    c.note("worst_builtin_a2", worst_a2);

    // build a small tabulated kernel with a calibrated asymmetric injection
    {
        const DomainSpec dom1 = DomainSpec::torus(1);
        PhaseGrid g2 = build_grid(dom1, 6.0, 16, 32);
        g2.attach_potential(pot);
        const std::size_t Nv = g2.num_v_cells();
        const std::size_t a0 = Nv / 2, b0 = Nv / 2 + 3;
        const double target = 1e-3;
        const double Mb0 = maxwellian(g2.v_center(b0), 1);
        const double Mha0 = g2.maxwellian_h(a0);
        const double delta = target / (g2.w_v() * Mb0 * Mha0);
        std::vector<double> tab(g2.num_x_cells() * Nv * Nv, 1.0);  // symmetric base ktilde = 1
        for (std::size_t ix = 0; ix < g2.num_x_cells(); ++ix) tab[(ix * Nv + a0) * Nv + b0] += delta;
        const KernelSpec inj = KernelSpec::tabulated(std::move(tab), static_cast<int>(g2.num_x_cells()),
                                                     static_cast<int>(Nv));
        BoundKernel kernel(inj, g2, pot, threads);
        const KernelReport rep = kernel.validate(1e-10);
        c.note("injected_residual", rep.a2_residual);
        c.require(!rep.a2_pass, "injected-asymmetry kernel fails A2");
        c.require(std::abs(rep.a2_residual - target) <= 0.1 * target,
                  "injected residual matches the injection to 10%");
    }
    return c;
}

// ---------------------------------------------------------------------------
// 14. BGK: fixed point + exponential relaxation

Check crit14_bgk(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::harmonic_trap(vec1(0.5), 1.0, 0.1, 0.28);
    PhaseGrid grid = build_grid(dom, 6.0, 128, 128);
    grid.attach_potential(pot);
    const Profile sigma = Profile::constant(1.0);
    const BgkEquilibrium eq = build_bgk_equilibrium(grid, pot, [](double h) { return std::exp(-h); });

    // fixed point: c*F is stationary for the operator
    {
        std::vector<double> f(eq.F);
        for (auto& v : f) v *= 2.5;
        std::vector<double> out;
        bgk_apply(sigma, eq, grid, f, out);
        double worst = 0;
        for (double v : out) worst = std::max(worst, std::abs(v));
        c.note("fixed_point_residual", worst);
        c.require(worst <= 1e-10, "bgk_apply(c F) = 0 to 1e-10");
    }

    auto f0 = density_modes_field(grid, 0.5, 0.6, 1, 41);
    const double mass0 = field_mass(f0, grid);
    double massF = 0;
    for (std::size_t ix : grid.inside_x())
        for (std::size_t iv = 0; iv < grid.num_v_cells(); ++iv)
            massF += grid.w_cell() * eq.F[ix * grid.num_v_cells() + iv];

    EvolveSetup setup;
    setup.grid = &grid;
    setup.pot = &pot;
    setup.collision = bgk_backend(sigma, eq, grid, 1.0);
    setup.norm2_sq = [&](const std::vector<double>& f) { return bgk_norm2_sq(f, eq, grid); };
    setup.norm_inf = [&](const std::vector<double>& f) {
        double m = 0;
        for (std::size_t i = 0; i < f.size(); ++i)
            if (eq.F[i] > 0) m = std::max(m, std::abs(f[i]) / eq.F[i]);
        return m;
    };
    setup.equilibrium.resize(f0.size());
    for (std::size_t i = 0; i < f0.size(); ++i) setup.equilibrium[i] = mass0 / massF * eq.F[i];

    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Cubic;
    opts.dt = 2e-3;
    opts.T = 20.0;
    opts.output_dt = 0.1;
    opts.interp_safety = 2.0;
    opts.threads = threads;
    EvolutionSeries series = evolve(f0, setup, opts);
    const DecayReport rep = fit_decay(series);
    c.note("bgk_gamma", rep.gamma).note("bgk_residual", rep.gamma_residual).note("verdict", rep.verdict);
    c.require(rep.verdict == "exponential", "BGK run has exponential verdict");
    c.require(series.l2_dist.back() <= 0.02 * series.l2_dist.front(),
              "converged toward (int f0) F / int F");
    return c;
}

// ---------------------------------------------------------------------------
// 15. Observability constant vs the fitted decay rate

Check crit15_observability(int threads) {
    Check c;
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 6.0, 128, 128);
    grid.attach_potential(pot);
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
    BoundKernel kernel(spec, grid, pot, threads);

    const double T = 6.0;
    std::vector<EvolutionSeries> runs;
    std::vector<double> gammas;
    for (int r = 0; r < 20; ++r) {
        auto f0 = density_modes_field(grid, 0.3 + 0.02 * r, 0.7, 1 + r % 3, 100 + r);
        const auto p = project_global_maxwellian(f0, grid);
        for (std::size_t i = 0; i < f0.size(); ++i) f0[i] -= p[i];  // zero-mean datum
        SolverOptions opts;
        opts.scheme = Scheme::Strang;
        opts.interp = Interp::Spectral;
        opts.dt = 1.0 / 6.0;
        opts.T = T;
        opts.output_dt = 1.0 / 6.0;
        opts.threads = threads;
        EvolveSetup setup = standard_setup(grid, pot, kernel, f0, nullptr);
        setup.equilibrium.assign(f0.size(), 0.0);
        runs.push_back(evolve(f0, setup, opts));
        gammas.push_back(fit_decay(runs.back()).gamma);
    }
    const ObservabilityReport rep = observability_check(runs, T);
    std::sort(gammas.begin(), gammas.end());
    const double gamma_fit = gammas[gammas.size() / 2];
    c.note("K", rep.K).note("gamma_from_K", rep.gamma_from_K).note("gamma_fit", gamma_fit);
    c.require(rep.violations == 0 && std::isfinite(rep.K) && rep.K > 0, "finite K across 20 runs");
    const double ratio = rep.gamma_from_K / gamma_fit;
    c.note("ratio", ratio);
    c.require(ratio >= 0.5 && ratio <= 2.0, "gamma recovered from K within factor 2 of the direct fit");
    return c;
}

} // namespace

std::vector<CriterionResult> run_selected(const std::vector<int>& ids, int threads, std::ostream& log) {
    struct Entry {
        int id;
        const char* name;
        Check (*fn)(int);
    };
    const Entry entries[] = {
        {1, "flow vs closed-form trap + energy drift order", crit1_flow},
        {2, "unit-disk billiard vs analytic circle map", crit2_billiard},
        {3, "dissipation identity residual, order 2", crit3_dissipation},
        {4, "weak coercivity suite", crit4_coercivity},
        {5, "Lebeau constants, multiplicative example", crit5_lebeau},
        {6, "exponential decay verdicts", crit6_exponential},
        {7, "no uniform exponential rate (degenerate_v)", crit7_no_uniform_rate},
        {8, "polynomial lower bound (survival + norm)", crit8_lower_bound},
        {9, "class structure + per-class conservation", crit9_classes},
        {10, "trapped harmonic potential", crit10_trap},
        {11, "stationary basis fields, per-step drift", crit11_stationarity},
        {12, "stadium specular-domain convergence", crit12_stadium},
        {13, "kernel validation A1/A2/A3 + injection", crit13_validation},
        {14, "BGK fixed point + relaxation", crit14_bgk},
        {15, "observability constant vs fitted rate", crit15_observability},
    };
    std::vector<CriterionResult> results;
    for (const Entry& e : entries) {
        if (!ids.empty() && std::find(ids.begin(), ids.end(), e.id) == ids.end()) continue;
        CriterionResult r;
        r.id = e.id;
        r.name = e.name;
        const auto start = std::chrono::steady_clock::now();
        try {
            Check c = e.fn(threads);
            r.pass = c.ok;
            r.detail = c.detail.str();
        } catch (const std::exception& ex) {
            r.pass = false;
            r.detail = std::string("exception: ") + ex.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        char line[160];
        std::snprintf(line, sizeof line, "[%2d] %-4s %-48s (%.1fs)", r.id, r.pass ? "PASS" : "FAIL",
                      r.name.c_str(), r.seconds);
        log << line << "\n";
        if (!r.detail.empty()) log << "     " << r.detail << "\n";
        log.flush();
        results.push_back(std::move(r));
    }
    return results;
}

std::vector<CriterionResult> run_all(int threads, std::ostream& log) {
    return run_selected({}, threads, log);
}

bool all_pass(const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return true;
}

} // namespace kinetic::accept
