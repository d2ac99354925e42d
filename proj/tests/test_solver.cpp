#include <doctest.h>

#include <cmath>

#include "control/control.hpp"
#include "core/errors.hpp"
#include "core/rng.hpp"
#include "solver/solver.hpp"

using namespace kinetic;

namespace {

struct Fixture {
    DomainSpec dom = DomainSpec::torus(1);
    PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid;
    explicit Fixture(int nx = 64, int nv = 64, double vmax = 6.0) : grid(build_grid(dom, vmax, nx, nv)) {
        grid.attach_potential(pot);
    }

    std::vector<double> smooth_field(double ax, double av, int k) {
        const std::size_t Nv = grid.num_v_cells();
        std::vector<double> f(grid.num_cells());
        for (std::size_t ix = 0; ix < grid.num_x_cells(); ++ix) {
            const double rho = 1.0 + ax * std::cos(6.283185307179586 * k * grid.x_center(ix)[0]);
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                const double v = grid.v_center(iv)[0];
                f[ix * Nv + iv] = rho * (1.0 + av * v / (1 + v * v)) * grid.maxwellian_h(iv);
            }
        }
        return f;
    }

    EvolveSetup setup_for(const BoundKernel& kernel, const std::vector<double>& f0) {
        EvolveSetup s;
        s.grid = &grid;
        s.pot = &pot;
        s.collision = collision_backend(kernel);
        s.norm2_sq = [this](const std::vector<double>& f) { return weighted_norm2_sq(f, grid); };
        s.norm_inf = [this](const std::vector<double>& f) { return weighted_norm_inf(f, grid); };
        s.equilibrium = project_global_maxwellian(f0, grid);
        return s;
    }
};

} // namespace

TEST_CASE("weighted norms: equilibrium normalization, zero field, inner product") {
    Fixture fx;
    const std::size_t Nv = fx.grid.num_v_cells();
    std::vector<double> f(fx.grid.num_cells());
    for (std::size_t ix = 0; ix < fx.grid.num_x_cells(); ++ix)
        for (std::size_t iv = 0; iv < Nv; ++iv) f[ix * Nv + iv] = fx.grid.maxwellian_h(iv);
    CHECK(weighted_norm2_sq(f, fx.grid) == doctest::Approx(1.0).epsilon(1e-13));

    std::vector<double> z(fx.grid.num_cells(), 0.0);
    CHECK(weighted_norm2(z, fx.grid) == 0.0);

    Rng rng(3);
    std::vector<double> g(fx.grid.num_cells());
    for (auto& v : g) v = rng.uniform(-1, 1);
    CHECK(weighted_inner(g, g, fx.grid) == doctest::Approx(weighted_norm2_sq(g, fx.grid)));
}

TEST_CASE("free transport: pull-back matches the analytic shift") {
    Fixture fx(128, 16, 3.0);
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(0.0));
    // sigma = 0 makes the collision a no-op; bind directly (omega would be empty)
    BoundKernel kernel(spec, fx.grid, fx.pot, 1);
    auto f0 = fx.smooth_field(0.5, 0.0, 1);

    for (Interp interp : {Interp::Spectral, Interp::Cubic, Interp::Linear}) {
        SolverOptions opts;
        opts.scheme = Scheme::Strang;
        opts.interp = interp;
        opts.dt = 1e-3;
        opts.T = 0.25;
        opts.output_dt = 0.25;
        opts.interp_safety = 1.0;
        EvolveSetup setup = fx.setup_for(kernel, f0);
        const EvolutionSeries series = evolve(f0, setup, opts);
        // analytic: f(T, x, v) = f0(x - Tv, v)
        const std::size_t Nv = fx.grid.num_v_cells();
        double worst = 0;
        for (std::size_t ix = 0; ix < fx.grid.num_x_cells(); ++ix) {
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                const double v = fx.grid.v_center(iv)[0];
                const double rho =
                    1.0 + 0.5 * std::cos(6.283185307179586 * (fx.grid.x_center(ix)[0] - 0.25 * v));
                const double expect = rho * fx.grid.maxwellian_h(iv);
                worst = std::max(worst, std::abs(series.final_field[ix * Nv + iv] - expect));
            }
        }
        if (interp == Interp::Spectral) CHECK(worst <= 1e-12);
        if (interp == Interp::Cubic) CHECK(worst <= 5e-5);
        if (interp == Interp::Linear) CHECK(worst <= 5e-3);  // O(dx^2) per the contract
    }
}

TEST_CASE("stationary equilibrium stays fixed to 1e-8 over [0,10]") {
    Fixture fx(64, 64);
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
    BoundKernel kernel(spec, fx.grid, fx.pot, 1);
    const std::size_t Nv = fx.grid.num_v_cells();
    std::vector<double> f0(fx.grid.num_cells());
    for (std::size_t ix = 0; ix < fx.grid.num_x_cells(); ++ix)
        for (std::size_t iv = 0; iv < Nv; ++iv) f0[ix * Nv + iv] = fx.grid.maxwellian_h(iv);

    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Spectral;
    opts.dt = 0.01;
    opts.T = 10.0;
    opts.output_dt = 1.0;
    EvolveSetup setup = fx.setup_for(kernel, f0);
    const EvolutionSeries series = evolve(f0, setup, opts);
    std::vector<double> diff(f0.size());
    for (std::size_t i = 0; i < f0.size(); ++i) diff[i] = series.final_field[i] - f0[i];
    CHECK(weighted_norm2(diff, fx.grid) <= 1e-8);
}

TEST_CASE("energy decays monotonically with nonnegative dissipation") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
    BoundKernel kernel(spec, fx.grid, fx.pot, 1);
    auto f0 = fx.smooth_field(0.6, 0.8, 1);
    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Spectral;
    opts.dt = 5e-3;
    opts.T = 2.0;
    opts.output_dt = 0.05;
    EvolveSetup setup = fx.setup_for(kernel, f0);
    const EvolutionSeries series = evolve(f0, setup, opts);
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        CHECK(series.dissipation[i] >= 0.0);
        if (i > 0)
            CHECK(series.norm2_sq[i] <= series.norm2_sq[i - 1] * (1.0 + 1e-9));
    }
}

TEST_CASE("mass is conserved exactly by the strang scheme on the torus") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::mult_example();
    BoundKernel kernel(spec, fx.grid, fx.pot, 1);
    auto f0 = fx.smooth_field(0.7, 0.5, 2);
    for (Interp interp : {Interp::Spectral, Interp::Linear}) {
        SolverOptions opts;
        opts.scheme = Scheme::Strang;
        opts.interp = interp;
        opts.dt = interp == Interp::Linear ? 1e-3 : 0.05;
        opts.T = interp == Interp::Linear ? 0.2 : 5.0;
        opts.output_dt = opts.T;
        EvolveSetup setup = fx.setup_for(kernel, f0);
        const EvolutionSeries series = evolve(f0, setup, opts);
        CHECK(std::abs(series.mass.back() - series.initial_mass) <=
              1e-12 * std::abs(series.initial_mass));
    }
}

TEST_CASE("positivity and the weighted maximum principle under strang + linear") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::mult_example();
    BoundKernel kernel(spec, fx.grid, fx.pot, 1);
    auto f0 = fx.smooth_field(0.9, 0.9, 1);
    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Linear;
    opts.dt = 1e-3;
    opts.T = 0.5;
    opts.output_dt = 0.01;
    EvolveSetup setup = fx.setup_for(kernel, f0);
    const EvolutionSeries series = evolve(f0, setup, opts);
    const double linf0 = series.linf.front();
    for (std::size_t i = 0; i < series.t.size(); ++i) {
        CHECK(series.min_value[i] >= -1e-14);
        CHECK(series.linf[i] <= linf0 * (1.0 + 1e-6));
    }
}

TEST_CASE("dissipation residual: transport-only and stationary runs sit at the floor") {
    Fixture fx;
    SUBCASE("collisionless run") {
        const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(0.0));
        BoundKernel kernel(spec, fx.grid, fx.pot, 1);
        auto f0 = fx.smooth_field(0.5, 0.3, 1);
        SolverOptions opts;
        opts.scheme = Scheme::Strang;
        opts.interp = Interp::Spectral;
        opts.dt = 1e-2;
        opts.T = 1.0;
        opts.output_dt = 0.05;
        EvolveSetup setup = fx.setup_for(kernel, f0);
        const EvolutionSeries series = evolve(f0, setup, opts);
        CHECK(dissipation_residual(series) <= 1e-12);
    }
    SUBCASE("stationary run") {
        const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
        BoundKernel kernel(spec, fx.grid, fx.pot, 1);
        const std::size_t Nv = fx.grid.num_v_cells();
        std::vector<double> f0(fx.grid.num_cells());
        for (std::size_t ix = 0; ix < fx.grid.num_x_cells(); ++ix)
            for (std::size_t iv = 0; iv < Nv; ++iv) f0[ix * Nv + iv] = fx.grid.maxwellian_h(iv);
        SolverOptions opts;
        opts.scheme = Scheme::Strang;
        opts.interp = Interp::Spectral;
        opts.dt = 1e-2;
        opts.T = 1.0;
        opts.output_dt = 0.05;
        EvolveSetup setup = fx.setup_for(kernel, f0);
        const EvolutionSeries series = evolve(f0, setup, opts);
        CHECK(dissipation_residual(series) <= 1e-8);
    }
}

TEST_CASE("scheme convergence against the analytic free-transport solution") {
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    auto run_error = [&](int nx, double dt) {
        PhaseGrid grid = build_grid(dom, 3.0, nx, 16);
        grid.attach_potential(pot);
        const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(0.0));
        BoundKernel kernel(spec, grid, pot, 1);
        const std::size_t Nv = grid.num_v_cells();
        std::vector<double> f0(grid.num_cells());
        for (std::size_t ix = 0; ix < grid.num_x_cells(); ++ix)
            for (std::size_t iv = 0; iv < Nv; ++iv)
                f0[ix * Nv + iv] = (1.0 + 0.5 * std::cos(6.283185307179586 * grid.x_center(ix)[0])) *
                                   grid.maxwellian_h(iv);
        SolverOptions opts;
        opts.scheme = Scheme::Strang;
        opts.interp = Interp::Cubic;
        opts.dt = dt;
        opts.T = 0.5;
        opts.output_dt = 0.5;
        EvolveSetup setup;
        setup.grid = &grid;
        setup.pot = &pot;
        setup.collision = collision_backend(kernel);
        setup.norm2_sq = [&grid](const std::vector<double>& f) { return weighted_norm2_sq(f, grid); };
        setup.norm_inf = [&grid](const std::vector<double>& f) { return weighted_norm_inf(f, grid); };
        setup.equilibrium.assign(f0.size(), 0.0);
        const EvolutionSeries series = evolve(f0, setup, opts);
        double worst = 0;
        for (std::size_t ix = 0; ix < grid.num_x_cells(); ++ix)
            for (std::size_t iv = 0; iv < Nv; ++iv) {
                const double v = grid.v_center(iv)[0];
                const double expect =
                    (1.0 + 0.5 * std::cos(6.283185307179586 * (grid.x_center(ix)[0] - 0.5 * v))) *
                    grid.maxwellian_h(iv);
                worst = std::max(worst, std::abs(series.final_field[ix * Nv + iv] - expect));
            }
        return worst;
    };
    const double e1 = run_error(64, 2e-3);
    const double e2 = run_error(128, 1e-3);
    CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("duhamel and strang agree to first order on a short run") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
    BoundKernel kernel(spec, fx.grid, fx.pot, 1);
    auto f0 = fx.smooth_field(0.5, 0.5, 1);
    auto run = [&](Scheme scheme) {
        SolverOptions opts;
        opts.scheme = scheme;
        opts.interp = Interp::Spectral;
        opts.dt = 5e-3;
        opts.T = 1.0;
        opts.output_dt = 1.0;
        EvolveSetup setup = fx.setup_for(kernel, f0);
        return evolve(f0, setup, opts).final_field;
    };
    const auto fs = run(Scheme::Strang);
    const auto fd = run(Scheme::DuhamelSL);
    std::vector<double> diff(fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) diff[i] = fs[i] - fd[i];
    CHECK(weighted_norm2(diff, fx.grid) <= 1e-2 * weighted_norm2(fs, fx.grid));
}

TEST_CASE("per-class masses: support confinement and totals") {
    Fixture fx(64, 65);
    BoundKernel kernel(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                             Profile::interval(0.05, 0.45, 0.05), 4.0),
                       fx.grid, fx.pot, 1);
    const OmegaPartition om = extract_omega(kernel);
    ClassOptions copt;
    copt.seed = 51;
    const ClassStructure cs = build_classes(kernel, om, fx.pot, copt);
    REQUIRE(cs.class_regions.size() == 2);
    const auto basis = stationary_basis(cs, fx.grid);
    const auto masses = class_masses(basis[0], cs, fx.grid);
    // basis[0] is supported in exactly one region
    CHECK(std::min(masses[0], masses[1]) == 0.0);
    CHECK(std::max(masses[0], masses[1]) > 0.0);

    Rng rng(52);
    std::vector<double> f(fx.grid.num_cells());
    for (auto& v : f) v = rng.uniform(0, 1);
    const auto m = class_masses(f, fx.grid.num_cells() ? cs : cs, fx.grid);
    double covered = 0;
    for (const auto& region : cs.class_regions)
        for (std::size_t cell : region) covered += fx.grid.w_cell() * f[cell];
    CHECK(m[0] + m[1] == doctest::Approx(covered).epsilon(1e-12));
}

TEST_CASE("fit_decay: synthetic exponential and polynomial series") {
    std::vector<double> t, ye, yp;
    for (int i = 0; i <= 400; ++i) {
        const double tt = 0.25 * i;
        t.push_back(tt);
        ye.push_back(2.0 * std::exp(-0.3 * tt));
        yp.push_back(std::pow(1.0 + tt, -0.5));
    }
    const DecayReport re = fit_decay(t, ye);
    CHECK(re.gamma == doctest::Approx(0.3).epsilon(1e-3));
    CHECK(re.verdict == "exponential");

    const DecayReport rp = fit_decay(t, yp);
    CHECK(rp.poly_exponent == doctest::Approx(0.5).epsilon(0.04));
    CHECK(rp.verdict == "polynomial-like");
    CHECK(rp.window_rates.front() > rp.window_rates.back());

    CHECK_THROWS_AS(fit_decay(std::vector<double>{0, 1}, std::vector<double>{1, 0.5}), ContractError);
}

TEST_CASE("tau survival: omega covering the whole space gives zero survival") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
    BoundKernel kernel(spec, fx.grid, fx.pot, 1);
    const OmegaPartition om = extract_omega(kernel);
    SurvivalOptions sop;
    sop.n_samples = 10000;
    sop.t_grid = {0.5, 1.0};
    sop.x_lo = vec1(0.0);
    sop.x_hi = vec1(1.0);
    sop.v_lo = vec1(-1.0);
    sop.v_hi = vec1(1.0);
    sop.seed = 53;
    const SurvivalReport rep = tau_survival(om, fx.grid, fx.pot, sop);
    CHECK(rep.survival[0] == 0.0);
    CHECK(rep.survival[1] == 0.0);
}

TEST_CASE("observability: a collisionless run is flagged as a violation") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(0.0));
    BoundKernel kernel(spec, fx.grid, fx.pot, 1);
    auto f0 = fx.smooth_field(0.5, 0.5, 1);
    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Spectral;
    opts.dt = 0.05;
    opts.T = 2.0;
    opts.output_dt = 0.1;
    EvolveSetup setup = fx.setup_for(kernel, f0);
    setup.equilibrium.assign(f0.size(), 0.0);
    const EvolutionSeries series = evolve(f0, setup, opts);
    const ObservabilityReport rep = observability_check({series}, 2.0);
    CHECK(rep.violations == 1);
}

TEST_CASE("bounded-domain transport keeps the norm within interpolation drift") {
    const DomainSpec dom = DomainSpec::disk(1.0);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid = build_grid(dom, 4.0, 32, 12);
    grid.attach_potential(pot);
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(0.0));
    BoundKernel kernel(spec, grid, pot, 1);
    const std::size_t Nv = grid.num_v_cells();
    std::vector<double> f0(grid.num_cells(), 0.0);
    for (std::size_t ix : grid.inside_x())
        for (std::size_t iv = 0; iv < Nv; ++iv)
            f0[ix * Nv + iv] = (1.0 + 0.5 * grid.x_center(ix)[0]) * grid.maxwellian_h(iv);
    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Linear;
    opts.dt = 0.01;
    opts.T = 2.0;
    opts.output_dt = 0.1;
    opts.interp_safety = 2.0;
    EvolveSetup setup;
    setup.grid = &grid;
    setup.pot = &pot;
    setup.collision = collision_backend(kernel);
    setup.norm2_sq = [&grid](const std::vector<double>& f) { return weighted_norm2_sq(f, grid); };
    setup.norm_inf = [&grid](const std::vector<double>& f) { return weighted_norm_inf(f, grid); };
    setup.equilibrium.assign(f0.size(), 0.0);
    const EvolutionSeries series = evolve(f0, setup, opts);
    for (std::size_t i = 1; i < series.t.size(); ++i)
        CHECK(series.norm2_sq[i] <= series.norm2_sq[i - 1] * (1.0 + 1e-9));
    CHECK(series.norm2_sq.back() >= 0.8 * series.norm2_sq.front());
}

TEST_CASE("configuration gates: CFL-like guard and collision-rate cap") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
    BoundKernel kernel(spec, fx.grid, fx.pot, 1);
    auto f0 = fx.smooth_field(0.5, 0.5, 1);
    EvolveSetup setup = fx.setup_for(kernel, f0);
    SolverOptions opts;
    opts.scheme = Scheme::Strang;
    opts.interp = Interp::Linear;
    opts.dt = 1.0;  // v_max dt = 6 >> dx
    opts.T = 1.0;
    CHECK_THROWS_AS(evolve(f0, setup, opts), ConfigError);

    opts.interp = Interp::Spectral;
    opts.dt = 2.0;  // dt * max_b = 2 > 1
    CHECK_THROWS_AS(evolve(f0, setup, opts), ConfigError);
}
