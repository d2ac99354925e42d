#include "kinetic/kinetic.h"

#include <string>

#include "cli/runner.hpp"
#include "core/errors.hpp"
#include "flow/flow.hpp"
#include "io/config.hpp"
#include "kernels/kernels.hpp"

using namespace kinetic;

struct kn_context {
    ExperimentConfig config;
    std::string last_error;
    std::string last_report;
};

extern "C" {

int kn_version(void) { return 10000; }

kn_context* kn_context_create_from_file(const char* config_path, kn_status* err) {
    if (!config_path) {
        if (err) *err = KN_ERR_INVALID;
        return nullptr;
    }
    try {
        auto* ctx = new kn_context{ExperimentConfig::from_file(config_path), "", ""};
        if (err) *err = KN_OK;
        return ctx;
    } catch (const std::exception&) {
        if (err) *err = KN_ERR_CONFIG;
        return nullptr;
    }
}

kn_context* kn_context_create_from_string(const char* config_text, kn_status* err) {
    if (!config_text) {
        if (err) *err = KN_ERR_INVALID;
        return nullptr;
    }
    try {
        auto* ctx = new kn_context{ExperimentConfig::from_string(config_text), "", ""};
        if (err) *err = KN_OK;
        return ctx;
    } catch (const std::exception&) {
        if (err) *err = KN_ERR_CONFIG;
        return nullptr;
    }
}

void kn_context_destroy(kn_context* ctx) { delete ctx; }

kn_status kn_run(kn_context* ctx, const char* command, const char* output_dir) {
    if (!ctx || !command) return KN_ERR_INVALID;
    ctx->last_error.clear();
    try {
        std::string summary;
        const int rc = run_command(command, ctx->config, output_dir ? output_dir : "", &summary);
        ctx->last_report = summary;
        return rc == kExitAcceptance ? KN_ERR_ACCEPTANCE : KN_OK;
    } catch (const ConfigError& e) {
        ctx->last_error = e.what();
        return KN_ERR_CONFIG;
    } catch (const std::exception& e) {
        ctx->last_error = e.what();
        return KN_ERR_NUMERIC;
    }
}

const char* kn_last_error(const kn_context* ctx) { return ctx ? ctx->last_error.c_str() : ""; }

const char* kn_last_report_json(const kn_context* ctx) { return ctx ? ctx->last_report.c_str() : ""; }

double kn_maxwellian(const double* v, int dim) {
    if (!v || dim < 1 || dim > 2) return -1.0;
    return maxwellian(Vec{v[0], dim > 1 ? v[1] : 0.0}, dim);
}

kn_status kn_reflect(const double* v, const double* n, int dim, double* out) {
    if (!v || !n || !out || dim < 1 || dim > 2) return KN_ERR_INVALID;
    try {
        const Vec r = reflect(Vec{v[0], dim > 1 ? v[1] : 0.0}, Vec{n[0], dim > 1 ? n[1] : 0.0}, dim);
        for (int i = 0; i < dim; ++i) out[i] = r[i];
        return KN_OK;
    } catch (const std::exception&) {
        return KN_ERR_NUMERIC;
    }
}

kn_status kn_harmonic_flow(const double* x, const double* v, const double* x0, double eps, double t,
                           int dim, double* x_out, double* v_out) {
    if (!x || !v || !x0 || !x_out || !v_out || dim < 1 || dim > 2) return KN_ERR_INVALID;
    try {
        const State s = closed_form_harmonic(Vec{x[0], dim > 1 ? x[1] : 0.0},
                                             Vec{v[0], dim > 1 ? v[1] : 0.0},
                                             Vec{x0[0], dim > 1 ? x0[1] : 0.0}, eps, t, dim);
        for (int i = 0; i < dim; ++i) {
            x_out[i] = s.x[i];
            v_out[i] = s.v[i];
        }
        return KN_OK;
    } catch (const std::exception&) {
        return KN_ERR_NUMERIC;
    }
}

} // extern "C"
