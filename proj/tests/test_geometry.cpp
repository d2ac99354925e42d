#include <doctest.h>

#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "geometry/grid.hpp"
#include "geometry/potential.hpp"

using namespace kinetic;

TEST_CASE("zero potential evaluates to zero with zero gradient") {
    const DomainSpec dom = DomainSpec::torus(2);
    const PotentialSpec pot = PotentialSpec::zero();
    CHECK(pot.value(vec2(0.3, 0.9), dom) == 0.0);
    const Vec g = pot.gradient(vec2(0.3, 0.9), dom);
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 0.0);
}

TEST_CASE("harmonic trap is exactly quadratic near its center") {
    const DomainSpec dom = DomainSpec::torus(2);
    const Vec x0 = vec2(0.5, 0.5);
    const PotentialSpec pot = PotentialSpec::harmonic_trap(x0, 1.0, 0.1, 0.28);
    CHECK(pot.value(x0, dom) == doctest::Approx(0.0));
    const Vec g0 = pot.gradient(x0, dom);
    CHECK(std::abs(g0[0]) < 1e-15);

    const Vec x = vec2(0.6, 0.5);
    CHECK(pot.value(x, dom) == doctest::Approx(0.005).epsilon(1e-12));
    const Vec g = pot.gradient(x, dom);
    CHECK(g[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(std::abs(g[1]) < 1e-15);
}

TEST_CASE("gradient matches centered finite differences to O(h^2)") {
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::harmonic_trap(vec1(0.5), 1.3, 0.12, 0.4);
    Rng rng(2);
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
        const Vec x = vec1(rng.uniform());
        Vec xp = x, xm = x;
        xp[0] += h;
        xm[0] -= h;
        const double fd = (pot.value(dom.canonicalize(xp), dom) - pot.value(dom.canonicalize(xm), dom)) /
                          (2 * h);
        CHECK(pot.gradient(x, dom)[0] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("hamiltonian values") {
    const DomainSpec dom2 = DomainSpec::torus(2);
    const PotentialSpec zero = PotentialSpec::zero();
    CHECK(hamiltonian(vec2(0.1, 0.2), vec2(3, 4), zero, dom2) == doctest::Approx(12.5));
    CHECK(hamiltonian(vec2(0.1, 0.2), vec2(0, 0), zero, dom2) == 0.0);
    const Vec x0 = vec2(0.5, 0.5);
    const PotentialSpec trap = PotentialSpec::harmonic_trap(x0, 1.0, 0.1, 0.28);
    CHECK(hamiltonian(x0, vec2(0, 0), trap, dom2) == doctest::Approx(0.0));
}

TEST_CASE("torus canonicalization is idempotent") {
    const DomainSpec dom = DomainSpec::torus(2);
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const Vec x = vec2(rng.uniform(-5, 5), rng.uniform(-5, 5));
        const Vec c1 = dom.canonicalize(x);
        const Vec c2 = dom.canonicalize(c1);
        CHECK(c1[0] == c2[0]);
        CHECK(c1[1] == c2[1]);
        CHECK(c1[0] >= 0.0);
        CHECK(c1[0] < 1.0);
    }
}

TEST_CASE("grid mass defect matches the erf closed form and renormalizes exactly") {
    const DomainSpec dom = DomainSpec::torus(1);
    const PhaseGrid grid = build_grid(dom, 6.0, 8, 128);
    // midpoint quadrature of the Gaussian is exponentially accurate, so the
    // defect equals the analytic truncation error
    const double analytic = 1.0 - std::erf(6.0 / std::sqrt(2.0));
    CHECK(grid.mass_defect() < 2e-9);
    CHECK(grid.mass_defect() == doctest::Approx(analytic).epsilon(1e-3));

    double sum = 0;
    for (std::size_t iv = 0; iv < grid.num_v_cells(); ++iv) sum += grid.w_v() * grid.maxwellian_h(iv);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("too small velocity box is rejected") {
    const DomainSpec dom = DomainSpec::torus(1);
    CHECK_THROWS_AS(build_grid(dom, 0.5, 8, 4), ConfigError);
    CHECK_THROWS_AS(build_grid(dom, 6.0, 2, 128), ConfigError);
}

TEST_CASE("polygon validation") {
    // bow-tie: self-intersecting
    CHECK_THROWS_AS(DomainSpec::polygon({vec2(0, 0), vec2(1, 1), vec2(1, 0), vec2(0, 1)}), ConfigError);
    // clockwise: negatively oriented
    CHECK_THROWS_AS(DomainSpec::polygon({vec2(0, 0), vec2(0, 1), vec2(1, 1), vec2(1, 0)}), ConfigError);
    const DomainSpec sq = DomainSpec::polygon({vec2(0, 0), vec2(1, 0), vec2(1, 1), vec2(0, 1)});
    CHECK(sq.inside(vec2(0.5, 0.5)));
    CHECK(!sq.inside(vec2(1.5, 0.5)));
    const Vec n = sq.outward_normal(vec2(1.0, 0.5));
    CHECK(n[0] == doctest::Approx(1.0));
    CHECK(n[1] == doctest::Approx(0.0));
    CHECK(sq.area() == doctest::Approx(1.0));
}

TEST_CASE("disk and stadium geometry") {
    const DomainSpec disk = DomainSpec::disk(1.0);
    CHECK(disk.boundary_value(vec2(0.5, 0)) == doctest::Approx(-0.5));
    const Vec n = disk.outward_normal(vec2(0, 1));
    CHECK(n[1] == doctest::Approx(1.0));

    const DomainSpec stad = DomainSpec::stadium(2.0, 0.5);
    CHECK(stad.inside(vec2(0, 0)));
    CHECK(stad.inside(vec2(1.3, 0.2)));
    CHECK(!stad.inside(vec2(1.6, 0.0)));
    const Vec ns = stad.outward_normal(vec2(0.3, 0.5));
    CHECK(ns[0] == doctest::Approx(0.0));
    CHECK(ns[1] == doctest::Approx(1.0));
    CHECK(stad.area() == doctest::Approx(2.0 + 3.14159265358979 * 0.25).epsilon(1e-6));
}

TEST_CASE("bounded grids carry an inside mask") {
    const DomainSpec disk = DomainSpec::disk(1.0);
    PhaseGrid grid = build_grid(disk, 4.0, 16, 8);
    CHECK(grid.inside_x().size() > 0);
    CHECK(grid.inside_x().size() < grid.num_x_cells());
    for (std::size_t ix : grid.inside_x()) CHECK(disk.inside(grid.x_center(ix)));
}
