#include <doctest.h>

#include <cmath>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "flow/flow.hpp"

using namespace kinetic;

TEST_CASE("free transport steps are exact") {
    const DomainSpec dom = DomainSpec::torus(2);
    const PotentialSpec pot = PotentialSpec::zero();
    State s;
    s.x = vec2(0.25, 0.5);
    s.v = vec2(0.5, -0.25);
    const State n = flow_step(s, pot, dom, 0.125);
    CHECK(n.x[0] == doctest::Approx(0.25 + 0.0625).epsilon(1e-15));
    CHECK(n.x[1] == doctest::Approx(0.5 - 0.03125).epsilon(1e-15));
    CHECK(n.v[0] == 0.5);
    CHECK(n.v[1] == -0.25);
}

TEST_CASE("specular reflection: values, involution, norm") {
    CHECK(reflect(vec2(1, 0), vec2(1, 0), 2)[0] == doctest::Approx(-1.0));
    const Vec r = reflect(vec2(1, 1), vec2(1, 0), 2);
    CHECK(r[0] == doctest::Approx(-1.0));
    CHECK(r[1] == doctest::Approx(1.0));
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const Vec v = vec2(rng.normal(), rng.normal());
        const double a = rng.uniform(0, 6.283);
        const Vec n = vec2(std::cos(a), std::sin(a));
        const Vec rr = reflect(reflect(v, n, 2), n, 2);
        CHECK(rr[0] == doctest::Approx(v[0]).epsilon(1e-12));
        CHECK(rr[1] == doctest::Approx(v[1]).epsilon(1e-12));
        CHECK(vec_norm(reflect(v, n, 2), 2) == doctest::Approx(vec_norm(v, 2)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(reflect(vec2(1, 0), vec2(2, 0), 2), ContractError);
}

TEST_CASE("harmonic trap trace matches the closed form") {
    const DomainSpec dom = DomainSpec::torus(1);
    const Vec x0 = vec1(0.5);
    const PotentialSpec pot = PotentialSpec::harmonic_trap(x0, 1.0, 0.2, 0.45);
    State s;
    s.x = vec1(0.6);
    s.v = vec1(0.0);
    TraceOptions topt;
    topt.sample_dt = 0.25;
    const TrajectoryRecord rec = trace(s, pot, dom, 1.0, 1e-3, topt);
    const State exact = closed_form_harmonic(s.x, s.v, x0, 1.0, 1.0, 1);
    CHECK(rec.samples.back().x[0] == doctest::Approx(exact.x[0]).epsilon(1e-4));
    CHECK(rec.samples.back().v[0] == doctest::Approx(exact.v[0]).epsilon(1e-4));
}

TEST_CASE("energy drift shrinks like h^2 on random trap orbits") {
    const DomainSpec dom = DomainSpec::torus(1);
    const Vec x0 = vec1(0.5);
    const PotentialSpec pot = PotentialSpec::harmonic_trap(x0, 1.0, 0.2, 0.45);
    Rng rng(11);
    double sum_ratio = 0;
    const int n = 20;
    for (int i = 0; i < n; ++i) {
        State s;
        s.x = vec1(0.5 + rng.uniform(-0.15, 0.15));
        s.v = vec1(rng.uniform(-0.15, 0.15));
        const TrajectoryRecord r1 = trace(s, pot, dom, 5.0, 2e-3);
        const TrajectoryRecord r2 = trace(s, pot, dom, 5.0, 1e-3);
        CHECK(std::isfinite(r1.max_energy_drift));
        if (r2.max_energy_drift > 0) sum_ratio += r1.max_energy_drift / r2.max_energy_drift;
    }
    const double mean_ratio = sum_ratio / n;
    CHECK(mean_ratio > 3.2);
    CHECK(mean_ratio < 4.8);
}

TEST_CASE("closed-form trap flow: identity at t=0 and one full period") {
    const Vec x0 = vec1(0.3);
    const double eps = 2.5;
    const Vec x = vec1(0.42), v = vec1(-0.07);
    const State s0 = closed_form_harmonic(x, v, x0, eps, 0.0, 1);
    CHECK(s0.x[0] == doctest::Approx(x[0]));
    CHECK(s0.v[0] == doctest::Approx(v[0]));
    const double period = 2.0 * 3.14159265358979323846 / std::sqrt(eps);
    const State s1 = closed_form_harmonic(x, v, x0, eps, period, 1);
    CHECK(s1.x[0] == doctest::Approx(x[0]).epsilon(1e-12));
    CHECK(s1.v[0] == doctest::Approx(v[0]).epsilon(1e-12));
    CHECK_THROWS_AS(closed_form_harmonic(x, v, x0, -1.0, 1.0, 1), ContractError);
}

TEST_CASE("trap orbits started in the small box stay in the double box") {
    const Vec x0 = vec1(0.5);
    const double eps = 1.0, eta = 0.2;
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        const Vec x = vec1(0.5 + rng.uniform(-eta, eta) * 0.99);
        const Vec v = vec1(rng.uniform(-eta, eta) * std::sqrt(eps) * 0.99);
        for (double t = 0; t < 12.0; t += 0.1) {
            const State s = closed_form_harmonic(x, v, x0, eps, t, 1);
            CHECK(std::abs(s.x[0] - x0[0]) <= 2 * eta + 1e-12);
            CHECK(std::abs(s.v[0]) <= 2 * std::sqrt(eps) * eta + 1e-12);
        }
    }
}

TEST_CASE("unit-disk diameter orbit reflects at odd times") {
    const DomainSpec dom = DomainSpec::disk(1.0);
    const PotentialSpec pot = PotentialSpec::zero();
    State s;
    s.x = vec2(0, 0);
    s.v = vec2(1, 0);
    TraceOptions topt;
    topt.sample_dt = 1e9;
    const TrajectoryRecord rec = trace(s, pot, dom, 9.5, 1e-3, topt);
    REQUIRE(rec.reflections.size() >= 4);
    for (std::size_t b = 0; b < 4; ++b)
        CHECK(rec.reflections[b].t == doctest::Approx(1.0 + 2.0 * b).epsilon(1e-8));
}

TEST_CASE("chord orbits have constant chord length 2 sin(theta)") {
    const DomainSpec dom = DomainSpec::disk(1.0);
    const PotentialSpec pot = PotentialSpec::zero();
    // launch from just inside the wall at incidence theta to the tangent
    const double theta = 0.7;
    State s;
    s.x = vec2(0.999, 0.0);
    // inward direction making angle theta with the tangent at (1,0)
    s.v = vec2(-std::sin(theta), std::cos(theta));
    TraceOptions topt;
    topt.sample_dt = 1e9;
    const TrajectoryRecord rec = trace(s, pot, dom, 40.0, 1e-3, topt);
    REQUIRE(rec.reflections.size() >= 10);
    const double expected = 2.0 * std::sin(theta);
    for (std::size_t b = 1; b < 10; ++b) {
        const Vec& a = rec.reflections[b - 1].point;
        const Vec& bb = rec.reflections[b].point;
        CHECK(std::hypot(bb[0] - a[0], bb[1] - a[1]) == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("torus trajectory with speed 1 is 1-periodic") {
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    State s;
    s.x = vec1(0.125);
    s.v = vec1(1.0);
    const TrajectoryRecord rec = trace(s, pot, dom, 1.0, 1e-3);
    CHECK(rec.samples.back().x[0] == doctest::Approx(0.125).epsilon(1e-9));
}

TEST_CASE("hitting time of a position window under the backward flow") {
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    PhaseSetTest in_set = [](const Vec& x, const Vec&) { return x[0] > 0.4 && x[0] < 0.6; };
    State s;
    s.x = vec1(0.5);
    s.v = vec1(1.0);
    auto hr0 = hitting_time(s, in_set, pot, dom, 10.0, 1e-3);
    REQUIRE(hr0.time.has_value());
    CHECK(*hr0.time == 0.0);

    s.x = vec1(0.0);
    auto hr = hitting_time(s, in_set, pot, dom, 10.0, 1e-3);
    REQUIRE(hr.time.has_value());
    CHECK(*hr.time == doctest::Approx(0.4).epsilon(0.01));
}

TEST_CASE("uniform samples stay uniform under the free flow (measure preservation)") {
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::zero();
    Rng rng(17);
    const int N = 40000;
    int in_box = 0;
    for (int i = 0; i < N; ++i) {
        State s;
        s.x = vec1(rng.uniform());
        s.v = vec1(rng.uniform(-3, 3));
        // phi_t for V=0 is the exact shear
        const double xt = s.x[0] + 1.7 * s.v[0];
        const double xc = xt - std::floor(xt);
        if (xc >= 0.2 && xc < 0.5) ++in_box;
    }
    const double frac = static_cast<double>(in_box) / N;
    CHECK(std::abs(frac - 0.3) < 4.0 * std::sqrt(0.3 * 0.7 / N));
}

TEST_CASE("relativistic velocity map conserves its hamiltonian") {
    const DomainSpec dom = DomainSpec::torus(1);
    const PotentialSpec pot = PotentialSpec::harmonic_trap(vec1(0.5), 1.0, 0.1, 0.28);
    TraceOptions topt;
    topt.vmap = VelocityMap::relativistic();
    State s;
    s.x = vec1(0.55);
    s.v = vec1(0.1);
    const TrajectoryRecord rec = trace(s, pot, dom, 5.0, 1e-3, topt);
    CHECK(rec.max_energy_drift < 1e-5);
}

TEST_CASE("grazing trajectories abort with a status instead of throwing") {
    const DomainSpec dom = DomainSpec::disk(1.0);
    const PotentialSpec pot = PotentialSpec::zero();
    State s;
    s.x = vec2(0.0, 1.0 - 1e-12);
    s.v = vec2(1.0, 1e-13);
    const TrajectoryRecord rec = trace(s, pot, dom, 3.0, 1e-3);
    CHECK(rec.status != TraceStatus::Completed);
}
