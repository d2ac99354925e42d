/*
 * C API for the kinetic transport/collision toolkit.
 *
 * The library is configuration-driven: create a context from a config file
 * (or its text), run named commands against it, and read back the JSON
 * summary. All heavy objects live behind the opaque context handle.
 */
#ifndef KINETIC_KINETIC_H
#define KINETIC_KINETIC_H

#ifdef __cplusplus
extern "C" {
#endif

typedef struct kn_context kn_context;

/* Status codes mirror the CLI exit codes. */
typedef enum kn_status {
    KN_OK = 0,
    KN_ERR_INVALID = 1,    /* bad handle / argument */
    KN_ERR_CONFIG = 2,     /* configuration problem */
    KN_ERR_NUMERIC = 3,    /* runtime numeric failure or contract violation */
    KN_ERR_ACCEPTANCE = 4, /* paper-suite ran with at least one failing criterion */
} kn_status;

/* Library version, encoded as major*10000 + minor*100 + patch. */
int kn_version(void);

/* Context lifecycle. On failure returns NULL and, when err is non-NULL,
 * stores the status there. */
kn_context* kn_context_create_from_file(const char* config_path, kn_status* err);
kn_context* kn_context_create_from_string(const char* config_text, kn_status* err);
void kn_context_destroy(kn_context* ctx);

/* Runs one subcommand: validate-kernel | flow | omega | gcc | lebeau |
 * classes | simulate | decay | tau | paper-suite. Artifacts are written under
 * output_dir (NULL: config/environment default). */
kn_status kn_run(kn_context* ctx, const char* command, const char* output_dir);

/* Message for the most recent error on this context (empty string if none).
 * The pointer stays valid until the next call on the context. */
const char* kn_last_error(const kn_context* ctx);

/* JSON summary of the most recent successful command (empty string if none). */
const char* kn_last_report_json(const kn_context* ctx);

/* ---- small pure helpers, callable without a context ---- */

/* Maxwellian density (2 pi)^{-d/2} exp(-|v|^2/2); dim in {1,2}. */
double kn_maxwellian(const double* v, int dim);

/* Specular reflection out = v - 2 (v.n) n; n must be unit length. */
kn_status kn_reflect(const double* v, const double* n, int dim, double* out);

/* Closed-form harmonic trap flow at time t (position and velocity out,
 * each dim entries). eps must be positive. */
kn_status kn_harmonic_flow(const double* x, const double* v, const double* x0, double eps, double t,
                           int dim, double* x_out, double* v_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* KINETIC_KINETIC_H */
