#include <doctest.h>

#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "kernels/kernels.hpp"
#include "solver/solver.hpp"

using namespace kinetic;

namespace {

struct Fixture {
    DomainSpec dom = DomainSpec::torus(1);
    PotentialSpec pot = PotentialSpec::zero();
    PhaseGrid grid;
    Fixture(int nx = 32, int nv = 64, double vmax = 6.0) : grid(build_grid(dom, vmax, nx, nv)) {
        grid.attach_potential(pot);
    }
    std::vector<double> random_field(std::uint64_t seed, bool nonneg = false) {
        Rng rng(seed);
        std::vector<double> f(grid.num_cells());
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = (nonneg ? rng.uniform() : rng.uniform(-1, 1)) *
                   grid.maxwellian_h(i % grid.num_v_cells());
        return f;
    }
    std::vector<double> maxwellian_density_field(double amp) {
        std::vector<double> f(grid.num_cells());
        const std::size_t Nv = grid.num_v_cells();
        for (std::size_t ix = 0; ix < grid.num_x_cells(); ++ix) {
            const double rho = 1.0 + amp * std::cos(6.28318530717958647 * grid.x_center(ix)[0]);
            for (std::size_t iv = 0; iv < Nv; ++iv) f[ix * Nv + iv] = rho * grid.maxwellian_h(iv);
        }
        return f;
    }
};

} // namespace

TEST_CASE("maxwellian point values and normalization") {
    CHECK(maxwellian(vec1(0), 1) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    CHECK(maxwellian(vec2(0, 0), 2) == doctest::Approx(1.0 / 6.283185307179586).epsilon(1e-12));
    Fixture fx;
    double mass = 0;
    for (std::size_t iv = 0; iv < fx.grid.num_v_cells(); ++iv)
        mass += fx.grid.w_v() * maxwellian(fx.grid.v_center(iv), 1);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));  // within the truncation defect
}

TEST_CASE("kernel point evaluations per family") {
    const DomainSpec dom = DomainSpec::torus(1);
    const KernelSpec lin = KernelSpec::linear_relaxation(Profile::constant(1.0));
    // k(x, v', v) = sigma(x) M(v)
    CHECK(lin.eval(vec1(0.3), vec1(2.0), vec1(0.5), dom, 1) ==
          doctest::Approx(maxwellian(vec1(0.5), 1)).epsilon(1e-14));

    const KernelSpec pz = KernelSpec::phi_zero(1.0);
    CHECK(pz.eval(vec1(0.3), vec1(1.7), vec1(0.0), dom, 1) == 0.0);  // phi(0) = 0

    const KernelSpec dg = KernelSpec::degenerate_v();
    CHECK(dg.eval(vec1(0.1), vec1(0.0), vec1(0.0), dom, 1) ==
          doctest::Approx(std::pow(6.283185307179586, -1.5)).epsilon(1e-12));
}

TEST_CASE("collision frequency: BGK column, degenerate decay, multiplicative split") {
    Fixture fx(32, 128);
    SUBCASE("linear relaxation gives b = sigma to quadrature tolerance") {
        const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(0.7));
        BoundKernel k(spec, fx.grid, fx.pot, 1);
        CHECK(k.b_continuous(vec1(0.2), vec1(1.3)) == doctest::Approx(0.7).epsilon(1e-8));
    }
    SUBCASE("degenerate_v frequency vanishes at large speed") {
        const KernelSpec spec = KernelSpec::degenerate_v();
        BoundKernel k(spec, fx.grid, fx.pot, 1);
        double m2 = 0;
        for (std::size_t iv = 0; iv < fx.grid.num_v_cells(); ++iv) {
            const double M = maxwellian(fx.grid.v_center(iv), 1);
            m2 += fx.grid.w_v() * M * M;
        }
        CHECK(k.b_continuous(vec1(0.5), vec1(0.0)) ==
              doctest::Approx(maxwellian(vec1(0.0), 1) * m2).epsilon(1e-12));
        CHECK(k.b_continuous(vec1(0.5), vec1(5.5)) < 1e-7 * k.b_continuous(vec1(0.5), vec1(0.0)));
    }
    SUBCASE("mult_example frequency is alpha(x) + beta psi(v)") {
        const KernelSpec spec = KernelSpec::mult_example();
        BoundKernel k(spec, fx.grid, fx.pot, 1);
        double beta = 0;
        for (std::size_t iv = 0; iv < fx.grid.num_v_cells(); ++iv) {
            const double s = std::abs(fx.grid.v_center(iv)[0]);
            beta += fx.grid.w_v() * (s <= 2 ? 1.0 : std::exp(-(s - 2))) *
                    maxwellian(fx.grid.v_center(iv), 1);
        }
        // x=0 sits on the alpha plateau; v=0 on the psi plateau
        CHECK(k.b_continuous(vec1(0.0), vec1(0.0)) == doctest::Approx(1.0 + beta).epsilon(1e-10));
        // far from the alpha support only the psi part remains
        CHECK(k.b_continuous(vec1(0.5), vec1(0.0)) == doctest::Approx(beta).epsilon(1e-10));
    }
}

TEST_CASE("A1: built-in kernels are nonnegative on random points") {
    const DomainSpec dom = DomainSpec::torus(1);
    std::vector<KernelSpec> specs;
    specs.push_back(KernelSpec::linear_relaxation(Profile::ball(vec1(0.5), 0.1, 0.2)));
    specs.push_back(KernelSpec::mult_example());
    specs.push_back(KernelSpec::degenerate_v());
    specs.push_back(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                          Profile::interval(0.05, 0.45, 0.05)));
    specs.push_back(KernelSpec::phi_zero());
    Rng rng(5);
    for (const auto& spec : specs) {
        for (int i = 0; i < 10000 / 5; ++i) {
            const Vec x = vec1(rng.uniform());
            const Vec a = vec1(rng.uniform(-6, 6));
            const Vec b = vec1(rng.uniform(-6, 6));
            CHECK(spec.eval(x, a, b, dom, 1) >= 0.0);
        }
    }
}

TEST_CASE("discrete A2 and stationarity of Maxwellian-density fields") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    const KernelReport rep = k.validate(1e-12);
    CHECK(rep.a2_residual <= 1e-12);
    CHECK(rep.a2_pass);

    auto f = fx.maxwellian_density_field(0.7);
    std::vector<double> cf;
    k.apply_collision(f, cf);
    // stationary in v: C(rho Mh) = 0 for the E1 family... nonzero rho only changes mass per column
    double worst = 0;
    for (double v : cf) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-14);
}

TEST_CASE("collision conserves mass exactly for every kernel") {
    Fixture fx;
    std::vector<KernelSpec> specs;
    specs.push_back(KernelSpec::linear_relaxation(Profile::ball(vec1(0.5), 0.1, 0.2)));
    specs.push_back(KernelSpec::mult_example());
    specs.push_back(KernelSpec::degenerate_v());
    specs.push_back(KernelSpec::phi_zero());
    for (const auto& spec : specs) {
        BoundKernel k(spec, fx.grid, fx.pot, 1);
        auto f = fx.random_field(23);
        std::vector<double> cf;
        k.apply_collision(f, cf);
        CHECK(std::abs(field_mass(cf, fx.grid)) <= 1e-12 * weighted_norm2(f, fx.grid));
    }
}

TEST_CASE("dissipation: nonnegative, matches the inner-product route, vanishes off omega") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::mult_example();
    BoundKernel k(spec, fx.grid, fx.pot, 2);
    auto f = fx.random_field(31);
    const double D = k.dissipation(f);
    const double D2 = k.dissipation_inner_product(f);
    CHECK(D >= 0.0);
    CHECK(std::abs(D - D2) <= 1e-10 * std::max(1.0, D));

    // field carried by a single x-column outside the support of a bump sigma
    const KernelSpec bump = KernelSpec::linear_relaxation(Profile::ball(vec1(0.25), 0.05, 0.1));
    BoundKernel kb(bump, fx.grid, fx.pot, 1);
    std::vector<double> g(fx.grid.num_cells(), 0.0);
    std::size_t far_ix = 0;
    double best = -1;
    for (std::size_t ix = 0; ix < fx.grid.num_x_cells(); ++ix) {
        const double d = std::abs(fx.dom.wrap_delta(fx.grid.x_center(ix), vec1(0.25))[0]);
        if (d > best) {
            best = d;
            far_ix = ix;
        }
    }
    for (std::size_t iv = 0; iv < fx.grid.num_v_cells(); ++iv)
        g[far_ix * fx.grid.num_v_cells() + iv] = 1.0;
    CHECK(kb.dissipation(g) == 0.0);
}

TEST_CASE("weak coercivity on class-wise Maxwellians (forward and converse)") {
    Fixture fx(32, 65);
    const KernelSpec spec = KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                                  Profile::interval(0.05, 0.45, 0.05), 4.0);
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    const std::size_t Nv = fx.grid.num_v_cells();
    std::vector<double> f(fx.grid.num_cells());
    for (std::size_t ix = 0; ix < fx.grid.num_x_cells(); ++ix) {
        const double x = fx.grid.x_center(ix)[0];
        const double r1 = 1.0 + 0.5 * std::cos(6.28 * x);
        const double r2 = 2.0 - 0.7 * std::sin(6.28 * x);
        for (std::size_t iv = 0; iv < Nv; ++iv)
            f[ix * Nv + iv] = (fx.grid.v_center(iv)[0] < 0 ? r1 : r2) * fx.grid.maxwellian_h(iv);
    }
    const double n = weighted_norm2(f, fx.grid);
    for (auto& v : f) v /= n;
    CHECK(k.dissipation(f) <= 1e-12);
    std::vector<double> cf;
    k.apply_collision(f, cf);
    CHECK(weighted_norm2(cf, fx.grid) <= 1e-6);

    auto g = fx.random_field(41);
    CHECK(k.dissipation(g) > 0.0);
}

TEST_CASE("symmetrized operator: equals C for E1 kernels, satisfies the coercivity bound") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::mult_example();
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    auto f = fx.random_field(43);
    std::vector<double> c1, c2;
    k.apply_collision(f, c1);
    k.symmetrized_apply(f, c2);
    double worst = 0;
    for (std::size_t i = 0; i < c1.size(); ++i) worst = std::max(worst, std::abs(c1[i] - c2[i]));
    CHECK(worst <= 1e-13);

    const double lhs = k.sup_kbar() * k.dissipation(f);
    const double rhs = weighted_norm2_sq(c2, fx.grid);
    CHECK(lhs - rhs >= -1e-10 * std::max(1.0, lhs));

    auto fm = fx.maxwellian_density_field(0.0);
    std::vector<double> cm;
    k.symmetrized_apply(fm, cm);
    double wm = 0;
    for (double v : cm) wm = std::max(wm, std::abs(v));
    CHECK(wm <= 1e-14);
}

TEST_CASE("gain operator norm is bounded by the A3 report value") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::mult_example();
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    const KernelReport rep = k.validate();
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        auto f = fx.random_field(100 + trial);
        const double n = weighted_norm2(f, fx.grid);
        for (auto& v : f) v /= n;
        std::vector<double> gf;
        k.apply_gain(f, gf);
        CHECK(weighted_norm2(gf, fx.grid) <= rep.gain_norm_bound + 1e-8);
    }
}

TEST_CASE("A3' fit produces a dominating Theta and finite Gamma") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::mult_example();
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    const KernelReport rep = k.validate();
    CHECK(rep.a3p_pass);
    CHECK(rep.a3p_lambda >= 1.0);
    // b <= lambda e^{H/4} on the grid by construction of lambda
    for (std::size_t ix = 0; ix < fx.grid.num_x_cells(); ix += 7)
        for (std::size_t iv = 0; iv < fx.grid.num_v_cells(); iv += 5) {
            const double H = 0.5 * norm2(fx.grid.v_center(iv), 1);
            CHECK(k.b_grid(ix, iv) <= rep.a3p_lambda * std::exp(0.25 * H) + 1e-12);
        }
}

TEST_CASE("BGK operator: fixed point, exact mass, dissipation sign and kernel") {
    Fixture fx;
    const Profile sigma = Profile::constant(1.0);
    const BgkEquilibrium eq = build_bgk_equilibrium(fx.grid, fx.pot, [](double h) { return std::exp(-h); });
    std::vector<double> f = eq.F;
    for (auto& v : f) v *= 3.0;
    std::vector<double> out;
    bgk_apply(sigma, eq, fx.grid, f, out);
    for (double v : out) CHECK(std::abs(v) <= 1e-14);

    auto g = fx.random_field(51, true);
    bgk_apply(sigma, eq, fx.grid, g, out);
    CHECK(std::abs(field_mass(out, fx.grid)) <= 1e-14);

    const double D = bgk_dissipation(sigma, eq, fx.grid, g);
    CHECK(D >= 0.0);
    // oracle: independent double-velocity sum
    double Dref = 0;
    const std::size_t Nv = fx.grid.num_v_cells();
    for (std::size_t ix : fx.grid.inside_x()) {
        double col = 0;
        for (std::size_t a = 0; a < Nv; ++a)
            for (std::size_t b = 0; b < Nv; ++b) {
                const double Fa = eq.F[ix * Nv + a], Fb = eq.F[ix * Nv + b];
                const double diff = g[ix * Nv + a] / Fa - g[ix * Nv + b] / Fb;
                col += fx.grid.w_v() * fx.grid.w_v() * Fa * Fb / eq.rho_F[ix] * diff * diff;
            }
        Dref += fx.grid.w_x() * col;  // sigma = 1
    }
    CHECK(D == doctest::Approx(Dref).epsilon(1e-10));

    // f proportional to F per column has zero dissipation
    std::vector<double> h(fx.grid.num_cells());
    for (std::size_t ix : fx.grid.inside_x()) {
        const double c = 1.0 + 0.3 * std::sin(6.28 * fx.grid.x_center(ix)[0]);
        for (std::size_t iv = 0; iv < Nv; ++iv) h[ix * Nv + iv] = c * eq.F[ix * Nv + iv];
    }
    CHECK(bgk_dissipation(sigma, eq, fx.grid, h) <= 1e-14);
}

TEST_CASE("non-degeneracy estimates for velocity maps") {
    const auto identity = [](const Vec& v, int) { return v; };
    auto rep = check_nondegeneracy(identity, 1, 6.0, 0.5, 200000, 7);
    CHECK(rep.fitted_gamma == doctest::Approx(1.0).epsilon(0.1));
    CHECK(rep.worst_measure == doctest::Approx(1.0).epsilon(0.05));  // 2 eps at eps=0.5
    CHECK(!rep.degenerate);

    const auto rel = [](const Vec& v, int d) {
        const double g = 1.0 / std::sqrt(1.0 + norm2(v, d));
        return Vec{v[0] * g, v[1] * g};
    };
    rep = check_nondegeneracy(rel, 1, 6.0, 0.25, 200000, 7);
    CHECK(std::abs(rep.fitted_gamma - 1.0) <= 0.15);

    const auto constant = [](const Vec&, int) { return vec1(0.37); };
    rep = check_nondegeneracy(constant, 1, 6.0, 0.5, 50000, 7);
    CHECK(rep.degenerate);
}

TEST_CASE("tabulated kernels require matching dimensions and reject negatives") {
    Fixture fx(8, 8);
    const std::size_t Nv = fx.grid.num_v_cells();
    std::vector<double> tab(fx.grid.num_x_cells() * Nv * Nv, 1.0);
    tab[3] = -0.5;
    const KernelSpec bad = KernelSpec::tabulated(std::move(tab), static_cast<int>(fx.grid.num_x_cells()),
                                                 static_cast<int>(Nv));
    CHECK_THROWS_AS(BoundKernel(bad, fx.grid, fx.pot, 1), ContractError);
}
