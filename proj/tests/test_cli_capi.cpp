#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "kinetic/kinetic.h"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kTwoClassConfig = R"(
[experiment]
name = two_class_smoke
seed = 42
threads = 2

[domain]
kind = torus
d = 1

[grid]
nx = 64
nv = 65
vmax = 6

[kernel]
family = two_class
alpha = interval:0.55,0.95,0.05
beta = interval:0.05,0.45,0.05
amp = 4.0

[sim]
scheme = strang
interp = spectral
dt = 0.1
T = 2.0

[init]
kind = density_modes

[sampling]
class_seeds = 16
)";

} // namespace

TEST_CASE("C API: context lifecycle and error reporting") {
    kn_status st = KN_OK;
    kn_context* bad = kn_context_create_from_string("[domain\nkind=torus", &st);
    CHECK(bad == nullptr);
    CHECK(st == KN_ERR_CONFIG);

    kn_context* ctx = kn_context_create_from_string(kTwoClassConfig, &st);
    REQUIRE(ctx != nullptr);
    CHECK(st == KN_OK);
    CHECK(kn_run(ctx, "no-such-command", "/tmp/kinetic_test_unknown") == KN_ERR_CONFIG);
    CHECK(std::string(kn_last_error(ctx)).find("unknown command") != std::string::npos);
    kn_context_destroy(ctx);
}

TEST_CASE("C API: classes command reports two equivalence classes") {
    kn_status st = KN_OK;
    kn_context* ctx = kn_context_create_from_string(kTwoClassConfig, &st);
    REQUIRE(ctx != nullptr);
    const std::string outdir = "/tmp/kinetic_test_classes";
    std::filesystem::remove_all(outdir);
    REQUIRE(kn_run(ctx, "classes", outdir.c_str()) == KN_OK);
    const auto j = nlohmann::json::parse(std::string(kn_last_report_json(ctx)));
    CHECK(j["classes"]["class_count"] == 2);
    CHECK(j["classes"]["companion_class_count"] == 2);
    CHECK(j["classes"]["counts_match"] == true);
    CHECK(std::filesystem::exists(outdir + "/classes.json"));
    CHECK(std::filesystem::exists(outdir + "/basis_0.snap"));
    CHECK(std::filesystem::exists(outdir + "/basis_1.snap"));
    kn_context_destroy(ctx);
}

TEST_CASE("C API: validate-kernel emits a passing report with provenance") {
    kn_status st = KN_OK;
    kn_context* ctx = kn_context_create_from_string(kTwoClassConfig, &st);
    REQUIRE(ctx != nullptr);
    const std::string outdir = "/tmp/kinetic_test_validate";
    std::filesystem::remove_all(outdir);
    REQUIRE(kn_run(ctx, "validate-kernel", outdir.c_str()) == KN_OK);
    const auto j = nlohmann::json::parse(slurp(outdir + "/kernel_report.json"));
    CHECK(j["report"]["a2_pass"] == true);
    CHECK(j["seed"] == 42);
    CHECK(j.contains("config_hash"));
    kn_context_destroy(ctx);
}

TEST_CASE("identical config, seed and threads give byte-identical artifacts") {
    for (const char* cmd : {"simulate"}) {
        std::string s1, s2;
        for (int run = 0; run < 2; ++run) {
            kn_status st = KN_OK;
            kn_context* ctx = kn_context_create_from_string(kTwoClassConfig, &st);
            REQUIRE(ctx != nullptr);
            const std::string outdir = "/tmp/kinetic_test_repro" + std::to_string(run);
            std::filesystem::remove_all(outdir);
            REQUIRE(kn_run(ctx, cmd, outdir.c_str()) == KN_OK);
            (run == 0 ? s1 : s2) = slurp(outdir + "/series.csv");
            kn_context_destroy(ctx);
        }
        CHECK(!s1.empty());
        CHECK(s1 == s2);
    }
}

TEST_CASE("pure helpers") {
    const double v0[2] = {0.0, 0.0};
    CHECK(kn_maxwellian(v0, 1) == doctest::Approx(0.3989422804014327));
    const double v[2] = {1.0, 1.0};
    const double n[2] = {1.0, 0.0};
    double out[2] = {0, 0};
    REQUIRE(kn_reflect(v, n, 2, out) == KN_OK);
    CHECK(out[0] == doctest::Approx(-1.0));
    CHECK(out[1] == doctest::Approx(1.0));

    const double x[1] = {0.6}, vv[1] = {0.0}, x0[1] = {0.5};
    double xo[1], vo[1];
    REQUIRE(kn_harmonic_flow(x, vv, x0, 1.0, 0.0, 1, xo, vo) == KN_OK);
    CHECK(xo[0] == doctest::Approx(0.6));
    CHECK(kn_harmonic_flow(x, vv, x0, -1.0, 0.0, 1, xo, vo) == KN_ERR_NUMERIC);
}

TEST_CASE("environment variable overrides the config output directory") {
    kn_status st = KN_OK;
    kn_context* ctx = kn_context_create_from_string(kTwoClassConfig, &st);
    REQUIRE(ctx != nullptr);
    const std::string outdir = "/tmp/kinetic_test_envdir";
    std::filesystem::remove_all(outdir);
    setenv("KINETIC_OUTPUT_DIR", outdir.c_str(), 1);
    REQUIRE(kn_run(ctx, "omega", nullptr) == KN_OK);
    unsetenv("KINETIC_OUTPUT_DIR");
    CHECK(std::filesystem::exists(outdir + "/omega.json"));
    kn_context_destroy(ctx);
}
