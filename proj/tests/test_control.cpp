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
    explicit Fixture(int nx = 64, int nv = 65, double vmax = 6.0) : grid(build_grid(dom, vmax, nx, nv)) {
        grid.attach_potential(pot);
    }
};

} // namespace

TEST_CASE("omega of a bump relaxation kernel factorizes into one component") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::interval(0.4, 0.6, 0.05));
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    const OmegaPartition om = extract_omega(k);
    CHECK(om.num_components == 1);
    CHECK(om.factorization_checked);
    // mask is exactly sigma-support columns x full velocity box
    const std::size_t Nv = fx.grid.num_v_cells();
    for (std::size_t ix = 0; ix < fx.grid.num_x_cells(); ++ix) {
        const double x = fx.grid.x_center(ix)[0];
        const bool expect = x > 0.4 && x < 0.6;
        CHECK((om.px_mask[ix] != 0) == expect);
        for (std::size_t iv = 0; iv < Nv; ++iv)
            CHECK((om.mask[ix * Nv + iv] != 0) == expect);
    }
}

TEST_CASE("omega components: phi_zero splits at v=0, two_class splits by sign") {
    Fixture fx;
    {
        BoundKernel k(KernelSpec::phi_zero(4.0), fx.grid, fx.pot, 1);
        const OmegaPartition om = extract_omega(k);
        CHECK(om.num_components == 2);
    }
    {
        BoundKernel k(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                            Profile::interval(0.05, 0.45, 0.05), 4.0),
                      fx.grid, fx.pot, 1);
        const OmegaPartition om = extract_omega(k);
        CHECK(om.num_components == 2);
    }
}

TEST_CASE("identically vanishing kernels are rejected") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(0.0));
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    CHECK_THROWS_AS(extract_omega(k), ConfigError);
}

TEST_CASE("GCC sampling: full phase space is controlled instantly") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(1.0));
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    const OmegaPartition om = extract_omega(k);
    GccOptions gopt;
    gopt.T = 0.5;
    gopt.n_samples = 1000;
    gopt.seed = 21;
    const GccReport rep = check_gcc(om, fx.grid, fx.pot, gopt);
    CHECK(rep.fraction == 1.0);
    CHECK(rep.holds_sampled);
}

TEST_CASE("GCC sampling: position bump controls almost every free trajectory") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::interval(0.4, 0.6, 0.05));
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    const OmegaPartition om = extract_omega(k);
    GccOptions gopt;
    gopt.T = 200.0;
    gopt.n_samples = 10000;
    gopt.h = 2e-3;
    gopt.seed = 22;
    const GccReport rep = check_gcc(om, fx.grid, fx.pot, gopt);
    CHECK(rep.fraction >= 0.99);
}

TEST_CASE("Lebeau constants of a constant collision frequency") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::linear_relaxation(Profile::constant(0.8));
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    for (double T : {1.0, 4.0}) {
        LebeauOptions lop;
        lop.T = T;
        lop.n_samples = 200;
        lop.refine_steps = 30;
        lop.h = 5e-3;
        lop.seed = 23;
        const LebeauEstimate est = lebeau_constant(k, fx.pot, lop);
        CHECK(est.c_minus == doctest::Approx(0.8).epsilon(1e-6));
        CHECK(est.c_plus == doctest::Approx(0.8).epsilon(1e-6));
        CHECK(est.c_minus <= est.c_plus + 1e-12);
    }
}

TEST_CASE("Lebeau minimum vanishes for the x-independent degenerate kernel") {
    Fixture fx;
    const KernelSpec spec = KernelSpec::degenerate_v();
    BoundKernel k(spec, fx.grid, fx.pot, 1);
    LebeauOptions lop;
    lop.T = 1.0;
    lop.n_samples = 400;
    lop.refine_steps = 40;
    lop.h = 5e-3;
    lop.seed = 24;
    const LebeauEstimate est = lebeau_constant(k, fx.pot, lop);
    // the flow preserves v, so C-(T) = inf_v b(v), tiny at the box edge
    CHECK(est.c_minus < 1e-4);
    CHECK(est.c_plus > 0.05);
}

TEST_CASE("class structure across the example kernels") {
    Fixture fx;
    ClassOptions copt;
    copt.seed = 31;
    SUBCASE("phi_zero: two components, one class, matching companion count") {
        BoundKernel k(KernelSpec::phi_zero(4.0), fx.grid, fx.pot, 1);
        const OmegaPartition om = extract_omega(k);
        const ClassStructure cs = build_classes(k, om, fx.pot, copt);
        CHECK(om.num_components == 2);
        CHECK(cs.num_classes == 1);
        CHECK(cs.num_reach_classes == 1);
        CHECK(cs.counts_match);
        CHECK(!cs.rk_edges.empty());
        // recorded witnesses re-validate
        for (const auto& e : cs.rk_edges) {
            const double k1 = k.spec().eval(e.x, e.v1, e.v2, fx.dom, 1);
            const double k2 = k.spec().eval(e.x, e.v2, e.v1, fx.dom, 1);
            CHECK(std::max(k1, k2) > om.eps_omega);
        }
    }
    SUBCASE("two_class: two classes and disjoint sign regions") {
        BoundKernel k(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                            Profile::interval(0.05, 0.45, 0.05), 4.0),
                      fx.grid, fx.pot, 1);
        const OmegaPartition om = extract_omega(k);
        const ClassStructure cs = build_classes(k, om, fx.pot, copt);
        CHECK(cs.num_classes == 2);
        CHECK(cs.num_reach_classes == 2);
        CHECK(cs.counts_match);
        REQUIRE(cs.class_regions.size() == 2);
        // each class region is a single velocity sign
        const std::size_t Nv = fx.grid.num_v_cells();
        for (const auto& region : cs.class_regions) {
            int sign = 0;
            for (std::size_t cell : region) {
                const double v = fx.grid.v_center(cell % Nv)[0];
                const int s = v > 0 ? 1 : -1;
                if (sign == 0) sign = s;
                CHECK(s == sign);
            }
        }
        CHECK(cs.aeit_fraction > 0.95);
    }
    SUBCASE("connected relaxation bump: one class") {
        BoundKernel k(KernelSpec::linear_relaxation(Profile::interval(0.4, 0.6, 0.05)), fx.grid,
                      fx.pot, 1);
        const OmegaPartition om = extract_omega(k);
        const ClassStructure cs = build_classes(k, om, fx.pot, copt);
        CHECK(cs.num_classes == 1);
        CHECK(cs.num_reach_classes == 1);
        CHECK(cs.aeit_fraction > 0.95);
    }
}

TEST_CASE("reachable-set components are backward invariant (sampled)") {
    Fixture fx;
    BoundKernel k(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                        Profile::interval(0.05, 0.45, 0.05), 4.0),
                  fx.grid, fx.pot, 1);
    const OmegaPartition om = extract_omega(k);
    ClassOptions copt;
    copt.seed = 32;
    const ClassStructure cs = build_classes(k, om, fx.pot, copt);
    Rng rng(33);
    const std::size_t Nv = fx.grid.num_v_cells();
    int checked = 0, violations = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t cell = rng.next_below(cs.reach_mask.size());
        if (!cs.reach_mask[cell]) continue;
        const int comp = cs.reach_component[cell];
        State s;
        s.x = fx.grid.x_center(cell / Nv);
        s.v = fx.grid.v_center(cell % Nv);
        // phi_{-t} for V=0
        const double t = rng.uniform(0.1, 5.0);
        Vec xt = vec1(s.x[0] - t * s.v[0]);
        std::size_t ix, iv;
        if (!fx.grid.locate_x(fx.dom.canonicalize(xt), ix) || !fx.grid.locate_v(s.v, iv)) continue;
        ++checked;
        const int comp_t = cs.reach_component[ix * Nv + iv];
        if (comp_t != comp) ++violations;
    }
    REQUIRE(checked > 100);
    CHECK(static_cast<double>(violations) / checked <= 1e-2);
}

TEST_CASE("stationary basis: orthonormal, collision-free, the secE3'-style pair") {
    Fixture fx;
    BoundKernel k(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                        Profile::interval(0.05, 0.45, 0.05), 4.0),
                  fx.grid, fx.pot, 1);
    const OmegaPartition om = extract_omega(k);
    ClassOptions copt;
    copt.seed = 34;
    const ClassStructure cs = build_classes(k, om, fx.pot, copt);
    const auto basis = stationary_basis(cs, fx.grid);
    REQUIRE(basis.size() == 2);
    CHECK(weighted_inner(basis[0], basis[0], fx.grid) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(weighted_inner(basis[1], basis[1], fx.grid) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(weighted_inner(basis[0], basis[1], fx.grid)) <= 1e-12);
    for (const auto& fj : basis) {
        std::vector<double> cf;
        k.apply_collision(fj, cf);
        CHECK(weighted_norm2(cf, fx.grid) <= 1e-10);
    }
    // values match the indicator e^{-V} Mh / norm form on each sign region
    const std::size_t Nv = fx.grid.num_v_cells();
    double norm_neg = 0;
    for (std::size_t ix = 0; ix < fx.grid.num_x_cells(); ++ix)
        for (std::size_t iv = 0; iv < Nv; ++iv)
            if (fx.grid.v_center(iv)[0] < 0) norm_neg += fx.grid.w_cell() * fx.grid.maxwellian_h(iv);
    const double expected = fx.grid.maxwellian_h(0) / std::sqrt(norm_neg);
    // basis field on the v<0 region at the lowest velocity node
    bool found = false;
    for (const auto& fj : basis) {
        if (fj[0] > 0) {
            CHECK(fj[0] == doctest::Approx(expected).epsilon(1e-10));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("projection onto the stationary basis") {
    Fixture fx;
    BoundKernel k(KernelSpec::two_class(Profile::interval(0.55, 0.95, 0.05),
                                        Profile::interval(0.05, 0.45, 0.05), 4.0),
                  fx.grid, fx.pot, 1);
    const OmegaPartition om = extract_omega(k);
    ClassOptions copt;
    copt.seed = 35;
    const ClassStructure cs = build_classes(k, om, fx.pot, copt);
    const auto basis = stationary_basis(cs, fx.grid);

    SUBCASE("projector fixes basis fields and is idempotent") {
        for (const auto& fj : basis) {
            const auto p = project_equilibrium(fj, cs, fx.grid);
            double worst = 0;
            for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - fj[i]));
            CHECK(worst <= 1e-12);
            const auto pp = project_equilibrium(p, cs, fx.grid);
            double worst2 = 0;
            for (std::size_t i = 0; i < p.size(); ++i) worst2 = std::max(worst2, std::abs(pp[i] - p[i]));
            CHECK(worst2 <= 1e-12);
        }
    }
    SUBCASE("projection preserves mass over the class regions and kills orthogonal data") {
        Rng rng(36);
        std::vector<double> f0(fx.grid.num_cells());
        for (auto& v : f0) v = rng.uniform(-1, 1);
        const auto p = project_equilibrium(f0, cs, fx.grid);
        // mass restricted to the union of class regions (the v=0 row is outside it here)
        double covered_mass = 0;
        for (const auto& region : cs.class_regions)
            for (std::size_t cell : region) covered_mass += fx.grid.w_cell() * f0[cell];
        CHECK(field_mass(p, fx.grid) == doctest::Approx(covered_mass).epsilon(1e-10));
        // f0 orthogonal to both basis fields projects to zero
        std::vector<double> g = f0;
        for (const auto& fj : basis) {
            const double c = weighted_inner(g, fj, fx.grid);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= c * fj[i];
        }
        const auto pg = project_equilibrium(g, cs, fx.grid);
        double worst = 0;
        for (double v : pg) worst = std::max(worst, std::abs(v));
        CHECK(worst <= 1e-10);
    }
    SUBCASE("single-class projection reduces to the global Maxwellian") {
        BoundKernel k1(KernelSpec::linear_relaxation(Profile::constant(1.0)), fx.grid, fx.pot, 1);
        const OmegaPartition om1 = extract_omega(k1);
        const ClassStructure cs1 = build_classes(k1, om1, fx.pot, copt);
        REQUIRE(cs1.num_reach_classes == 1);
        Rng rng(37);
        std::vector<double> f0(fx.grid.num_cells());
        for (auto& v : f0) v = rng.uniform(0, 1);
        const auto p1 = project_equilibrium(f0, cs1, fx.grid);
        const auto p2 = project_global_maxwellian(f0, fx.grid);
        double worst = 0;
        for (std::size_t i = 0; i < p1.size(); ++i) worst = std::max(worst, std::abs(p1[i] - p2[i]));
        CHECK(worst <= 1e-12);
    }
}
