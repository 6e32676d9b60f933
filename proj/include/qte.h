/* qte — template estimation under cyclic shifts.
 *
 * C interface to the shared library. All objects are opaque handles created
 * and destroyed by the library; every fallible call returns a qte_status and
 * reports detail through qte_last_error(). Signals are fixed-length real
 * sequences; the group is Z/NZ acting by circular index shifts.
 */

#ifndef QTE_H
#define QTE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define QTE_VERSION_MAJOR 0
#define QTE_VERSION_MINOR 1
#define QTE_VERSION_PATCH 0

typedef enum qte_status {
    QTE_OK = 0,
    QTE_ERR_INVALID_ARGUMENT = 1,
    QTE_ERR_DIMENSION_MISMATCH = 2,
    QTE_ERR_IO = 3,
    QTE_ERR_MISSING_HIDDEN = 4,
    QTE_ERR_NOT_CONVERGED = 5,
    QTE_ERR_CONFIG = 6,
    QTE_ERR_INTERNAL = 7
} qte_status;

/* Library version as "major.minor.patch". */
const char* qte_version(void);

/* Human-readable name of a status code. */
const char* qte_status_name(qte_status status);

/* Detail message of the last failure on the calling thread; empty string if
 * none. The pointer stays valid until the next failing call on the thread. */
const char* qte_last_error(void);

/* Frees strings returned through char** out-parameters. */
void qte_string_free(char* s);

/* ---------------------------------------------------------------- signals */

typedef struct qte_signal qte_signal;

qte_status qte_signal_create(const double* values, size_t n, qte_signal** out);
qte_status qte_signal_len(const qte_signal* sig, size_t* out);
/* Copies the values into caller storage of capacity `cap` (must be >= len). */
qte_status qte_signal_values(const qte_signal* sig, double* out, size_t cap);
qte_status qte_signal_norm(const qte_signal* sig, double* out);
void qte_signal_free(qte_signal* sig);

/* One value per line; loading accepts comma- or whitespace-separated text. */
qte_status qte_signal_save_csv(const qte_signal* sig, const char* path);
qte_status qte_signal_load_csv(const char* path, qte_signal** out);

/* Step template: `height` on [start, start+length), 0 elsewhere. */
qte_status qte_template_step(size_t n, size_t start, size_t length, double height,
                             qte_signal** out);
/* Smooth template: sum of amps[c] * cos(2*pi*freqs[c]*j/n). */
qte_status qte_template_smooth(size_t n, const double* freqs, const double* amps,
                               size_t terms, qte_signal** out);

/* ------------------------------------------------------------ group action */

typedef struct qte_registration {
    long shift;        /* aligning element k: min over k of ||x - (k.y)|| */
    double distance;   /* quotient distance after alignment */
    double margin;     /* second-best squared distance minus best */
    int is_unique;     /* margin above the scale-relative tolerance */
    int fft_fallback;  /* FFT path ran exhaustively (length not a power of 2) */
} qte_registration;

/* Applies the shift k: out[j] = x[(j + k) mod n]. Negative k wraps. */
qte_status qte_apply_shift(const qte_signal* x, long k, qte_signal** out);

#define QTE_REGISTER_EXHAUSTIVE 0
#define QTE_REGISTER_FFT 1

qte_status qte_register_signals(const qte_signal* x, const qte_signal* y, int method,
                                qte_registration* out);

qte_status qte_quotient_distance(const qte_signal* x, const qte_signal* y, double* out);
qte_status qte_is_fixed_point(const qte_signal* x, double tol, int* out);
qte_status qte_is_unique_registration(const qte_signal* m, const qte_signal* y, double tol,
                                      int* out);

/* ---------------------------------------------------------------- datasets */

typedef struct qte_dataset qte_dataset;

/* Draws `count` observations of Y = phi.t0 + sigma*eps (phi uniform over the
 * n shifts; eps i.i.d. Gaussian per coordinate with variance 1/n). Identical
 * arguments produce bitwise-identical datasets. */
qte_status qte_dataset_sample(const qte_signal* t0, double sigma, size_t count,
                              uint64_t seed, int keep_hidden, qte_dataset** out);

qte_status qte_dataset_size(const qte_dataset* ds, size_t* out);
qte_status qte_dataset_dim(const qte_dataset* ds, size_t* out);
qte_status qte_dataset_sigma(const qte_dataset* ds, double* out);
qte_status qte_dataset_observation(const qte_dataset* ds, size_t i, qte_signal** out);
/* QTE_ERR_MISSING_HIDDEN when the dataset kept no transforms. */
qte_status qte_dataset_phi(const qte_dataset* ds, size_t i, long* out);
void qte_dataset_free(qte_dataset* ds);

/* Columnar CSV plus JSON header; 17-significant-digit decimals, so a
 * save/load/save cycle is byte-identical. */
qte_status qte_dataset_save(const qte_dataset* ds, const char* csv_path,
                            const char* json_path);
qte_status qte_dataset_load(const char* csv_path, const char* json_path, qte_dataset** out);
/* JSON summary (header fields + empirical moments) of a serialized dataset. */
qte_status qte_dataset_inspect_json(const char* csv_path, const char* json_path, char** out);

/* F_I(x): mean squared quotient distance from x to the observations. */
qte_status qte_empirical_variance(const qte_signal* x, const qte_dataset* ds, double* value,
                                  double* std_error);

/* --------------------------------------------------- alternating estimator */

typedef struct qte_maxmax_result qte_maxmax_result;

/* Alternating minimization of the empirical variance (register everything,
 * average the registered observations). `m0` may be NULL for the default
 * start (plain mean of the observations). Stops when the registration vector
 * repeats; a run that hits max_steps still returns QTE_OK with converged=0. */
qte_status qte_maxmax_run(const qte_dataset* ds, const qte_signal* m0, size_t max_steps,
                          qte_maxmax_result** out);

qte_status qte_maxmax_estimate(const qte_maxmax_result* res, qte_signal** out);
qte_status qte_maxmax_steps(const qte_maxmax_result* res, size_t* out);
qte_status qte_maxmax_converged(const qte_maxmax_result* res, int* out);
qte_status qte_maxmax_final_variance(const qte_maxmax_result* res, double* out);
qte_status qte_maxmax_history_len(const qte_maxmax_result* res, size_t* out);
qte_status qte_maxmax_history(const qte_maxmax_result* res, double* out, size_t cap);
/* Margin certificate of the run (no perturbation testing), as JSON. */
qte_status qte_maxmax_certificate_json(const qte_maxmax_result* res, char** out);
void qte_maxmax_result_free(qte_maxmax_result* res);

/* Margin certificate at m plus n_perturb random perturbations at the
 * margin-derived radius, each checked for F_I(a) >= F_I(m). */
qte_status qte_verify_karcher_json(const qte_signal* m, const qte_dataset* ds,
                                   size_t n_perturb, uint64_t seed, char** out);

/* --------------------------------------------------------- bias estimators */

typedef struct qte_k_estimate {
    double value;      /* best estimate of sup_{||v||=1} E(sup_g <g.v, eps>) */
    double std_error;  /* from an independent held-out batch */
    uint64_t n_mc;
} qte_k_estimate;

/* Monte Carlo estimate of h(v) = E(sup_g <v, g.Y>); v must be unit norm. */
qte_status qte_estimate_h(const qte_signal* v, const qte_signal* t0, double sigma,
                          size_t n_mc, uint64_t seed, double* value, double* std_error);

/* Sphere maximization for the noise constant K (isotropic Gaussian noise).
 * `direction_out` may be NULL. Requires n_mc >= 1000. */
qte_status qte_estimate_k(size_t n, size_t n_mc, size_t n_starts, uint64_t seed,
                          qte_k_estimate* out, qte_signal** direction_out);

/* Sphere maximization of h(., t0, sigma): predicts the norm of the
 * population variance minimizer. `direction_out` may be NULL. */
qte_status qte_estimate_frechet_norm(const qte_signal* t0, double sigma, size_t n_mc,
                                     size_t n_starts, uint64_t seed, double* value,
                                     double* std_error, qte_signal** direction_out);

/* Bias report for an estimate, as JSON: empirical bias, the
 * sigma*K -/+ 2||t0|| bounds with slack, and verdicts. */
qte_status qte_bias_report_json(const qte_signal* t0, double sigma, const qte_signal* m_hat,
                                const qte_k_estimate* k, char** out);

/* Baseline mean with the true transforms undone: (1/I) sum phi_i^{-1}.Y_i.
 * QTE_ERR_MISSING_HIDDEN when the dataset kept no transforms. */
qte_status qte_oracle_mean(const qte_dataset* ds, qte_signal** out);

/* ----------------------------------------------------------------- harness */

typedef struct qte_config qte_config;

/* Fresh config with the documented defaults (see README). */
qte_status qte_config_create(qte_config** out);
/* Applies a key-value config file. */
qte_status qte_config_load_file(qte_config* cfg, const char* path);
/* Sets one key (same schema as the file). */
qte_status qte_config_set(qte_config* cfg, const char* key, const char* value);
/* Canonical key=value dump of the resolved config. */
qte_status qte_config_describe(const qte_config* cfg, char** out);
void qte_config_free(qte_config* cfg);

/* Commands write their artifacts under out_dir and are bitwise reproducible
 * for identical configs. A run that fails to converge writes its artifacts
 * and returns QTE_ERR_NOT_CONVERGED. */
qte_status qte_run_experiment(const qte_config* cfg, const char* out_dir);
qte_status qte_run_variance_curve(const qte_config* cfg, const char* out_dir);
qte_status qte_run_k_sweep(const qte_config* cfg, const char* out_dir);
qte_status qte_run_multistart(const qte_config* cfg, const char* out_dir);
qte_status qte_run_dataset_generate(const qte_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* QTE_H */
