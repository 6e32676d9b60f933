#include "qte.h"

#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>

#include "qte/harness.hpp"
#include "qte/io.hpp"
#include "qte/oracle.hpp"

using namespace qte;

struct qte_signal {
    Signal value;
};

struct qte_dataset {
    Dataset value;
};

struct qte_maxmax_result {
    MaxMaxResult value;
};

struct qte_config {
    ExperimentConfig value;
};

namespace {

thread_local std::string g_last_error;

qte_status fail(qte_status status, const char* what) {
    g_last_error = what ? what : "";
    return status;
}

template <typename Fn>
qte_status guarded(Fn&& fn) {
    try {
        fn();
        return QTE_OK;
    } catch (const ConfigError& e) {
        return fail(QTE_ERR_CONFIG, e.what());
    } catch (const MissingHiddenError& e) {
        return fail(QTE_ERR_MISSING_HIDDEN, e.what());
    } catch (const DimensionMismatch& e) {
        return fail(QTE_ERR_DIMENSION_MISMATCH, e.what());
    } catch (const IoError& e) {
        return fail(QTE_ERR_IO, e.what());
    } catch (const InvalidArgument& e) {
        return fail(QTE_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(QTE_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(QTE_ERR_INTERNAL, "unknown error");
    }
}

qte_status require_ptr(const void* p, const char* name) {
    if (p) return QTE_OK;
    return fail(QTE_ERR_INVALID_ARGUMENT, (std::string(name) + " must not be null").c_str());
}

#define QTE_REQUIRE(p)                                             \
    do {                                                           \
        if (require_ptr((p), #p) != QTE_OK) return QTE_ERR_INVALID_ARGUMENT; \
    } while (0)

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

qte_registration convert(const Registration& reg) {
    qte_registration out;
    out.shift = static_cast<long>(reg.element.k);
    out.distance = reg.distance;
    out.margin = reg.margin;
    out.is_unique = reg.unique ? 1 : 0;
    out.fft_fallback = reg.fft_fallback ? 1 : 0;
    return out;
}

qte_status run_command(const qte_config* cfg, const char* out_dir,
                       CommandResult (*command)(const ExperimentConfig&, const std::string&)) {
    if (!cfg || !out_dir) return fail(QTE_ERR_INVALID_ARGUMENT, "null argument");
    bool converged = true;
    const qte_status status = guarded([&] {
        converged = command(cfg->value, out_dir).converged;
    });
    if (status != QTE_OK) return status;
    if (!converged) return fail(QTE_ERR_NOT_CONVERGED, "estimation hit the step limit");
    return QTE_OK;
}

}  // namespace

extern "C" {

const char* qte_version(void) { return "0.1.0"; }

const char* qte_status_name(qte_status status) {
    switch (status) {
        case QTE_OK: return "ok";
        case QTE_ERR_INVALID_ARGUMENT: return "invalid argument";
        case QTE_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
        case QTE_ERR_IO: return "io error";
        case QTE_ERR_MISSING_HIDDEN: return "hidden fields not retained";
        case QTE_ERR_NOT_CONVERGED: return "not converged";
        case QTE_ERR_CONFIG: return "config error";
        case QTE_ERR_INTERNAL: return "internal error";
    }
    return "unknown";
}

const char* qte_last_error(void) { return g_last_error.c_str(); }

void qte_string_free(char* s) { std::free(s); }

qte_status qte_signal_create(const double* values, size_t n, qte_signal** out) {
    QTE_REQUIRE(values);
    QTE_REQUIRE(out);
    return guarded([&] {
        Signal sig(values, values + n);
        require_signal(sig);
        *out = new qte_signal{std::move(sig)};
    });
}

qte_status qte_signal_len(const qte_signal* sig, size_t* out) {
    QTE_REQUIRE(sig);
    QTE_REQUIRE(out);
    *out = sig->value.size();
    return QTE_OK;
}

qte_status qte_signal_values(const qte_signal* sig, double* out, size_t cap) {
    QTE_REQUIRE(sig);
    QTE_REQUIRE(out);
    if (cap < sig->value.size())
        return fail(QTE_ERR_INVALID_ARGUMENT, "output capacity too small");
    std::memcpy(out, sig->value.data(), sig->value.size() * sizeof(double));
    return QTE_OK;
}

qte_status qte_signal_norm(const qte_signal* sig, double* out) {
    QTE_REQUIRE(sig);
    QTE_REQUIRE(out);
    *out = norm(sig->value);
    return QTE_OK;
}

void qte_signal_free(qte_signal* sig) { delete sig; }

qte_status qte_signal_save_csv(const qte_signal* sig, const char* path) {
    QTE_REQUIRE(sig);
    QTE_REQUIRE(path);
    return guarded([&] { save_signal_csv(sig->value, path); });
}

qte_status qte_signal_load_csv(const char* path, qte_signal** out) {
    QTE_REQUIRE(path);
    QTE_REQUIRE(out);
    return guarded([&] { *out = new qte_signal{load_signal_csv(path)}; });
}

qte_status qte_template_step(size_t n, size_t start, size_t length, double height,
                             qte_signal** out) {
    QTE_REQUIRE(out);
    return guarded([&] {
        TemplateSpec spec;
        spec.kind = TemplateSpec::Kind::step;
        spec.n = n;
        spec.start = start;
        spec.length = length;
        spec.height = height;
        *out = new qte_signal{make_template(spec)};
    });
}

qte_status qte_template_smooth(size_t n, const double* freqs, const double* amps,
                               size_t terms, qte_signal** out) {
    QTE_REQUIRE(freqs);
    QTE_REQUIRE(amps);
    QTE_REQUIRE(out);
    return guarded([&] {
        TemplateSpec spec;
        spec.kind = TemplateSpec::Kind::smooth;
        spec.n = n;
        spec.frequencies.assign(freqs, freqs + terms);
        spec.amplitudes.assign(amps, amps + terms);
        *out = new qte_signal{make_template(spec)};
    });
}

qte_status qte_apply_shift(const qte_signal* x, long k, qte_signal** out) {
    QTE_REQUIRE(x);
    QTE_REQUIRE(out);
    return guarded([&] {
        const auto n = static_cast<long>(x->value.size());
        const long wrapped = ((k % n) + n) % n;
        *out = new qte_signal{
            act(Shift{static_cast<std::size_t>(wrapped), x->value.size()}, x->value)};
    });
}

qte_status qte_register_signals(const qte_signal* x, const qte_signal* y, int method,
                                qte_registration* out) {
    QTE_REQUIRE(x);
    QTE_REQUIRE(y);
    QTE_REQUIRE(out);
    return guarded([&] {
        const Registration reg = method == QTE_REGISTER_EXHAUSTIVE
                                     ? register_exhaustive(x->value, y->value)
                                     : register_fft(x->value, y->value);
        *out = convert(reg);
    });
}

qte_status qte_quotient_distance(const qte_signal* x, const qte_signal* y, double* out) {
    QTE_REQUIRE(x);
    QTE_REQUIRE(y);
    QTE_REQUIRE(out);
    return guarded([&] { *out = quotient_distance(x->value, y->value); });
}

qte_status qte_is_fixed_point(const qte_signal* x, double tol, int* out) {
    QTE_REQUIRE(x);
    QTE_REQUIRE(out);
    return guarded([&] { *out = is_fixed_point(x->value, tol) ? 1 : 0; });
}

qte_status qte_is_unique_registration(const qte_signal* m, const qte_signal* y, double tol,
                                      int* out) {
    QTE_REQUIRE(m);
    QTE_REQUIRE(y);
    QTE_REQUIRE(out);
    return guarded([&] {
        *out = (tol >= 0.0 ? is_unique_registration(m->value, y->value, tol)
                           : is_unique_registration(m->value, y->value))
                   ? 1
                   : 0;
    });
}

qte_status qte_dataset_sample(const qte_signal* t0, double sigma, size_t count,
                              uint64_t seed, int keep_hidden, qte_dataset** out) {
    QTE_REQUIRE(t0);
    QTE_REQUIRE(out);
    return guarded([&] {
        *out = new qte_dataset{
            Dataset::sample(t0->value, sigma, count, seed, keep_hidden != 0)};
    });
}

qte_status qte_dataset_size(const qte_dataset* ds, size_t* out) {
    QTE_REQUIRE(ds);
    QTE_REQUIRE(out);
    *out = ds->value.size();
    return QTE_OK;
}

qte_status qte_dataset_dim(const qte_dataset* ds, size_t* out) {
    QTE_REQUIRE(ds);
    QTE_REQUIRE(out);
    *out = ds->value.dim();
    return QTE_OK;
}

qte_status qte_dataset_sigma(const qte_dataset* ds, double* out) {
    QTE_REQUIRE(ds);
    QTE_REQUIRE(out);
    *out = ds->value.sigma();
    return QTE_OK;
}

qte_status qte_dataset_observation(const qte_dataset* ds, size_t i, qte_signal** out) {
    QTE_REQUIRE(ds);
    QTE_REQUIRE(out);
    return guarded([&] {
        require(i < ds->value.size(), "observation index out of range");
        const auto y = ds->value.observation(i);
        *out = new qte_signal{Signal(y.begin(), y.end())};
    });
}

qte_status qte_dataset_phi(const qte_dataset* ds, size_t i, long* out) {
    QTE_REQUIRE(ds);
    QTE_REQUIRE(out);
    return guarded([&] { *out = static_cast<long>(ds->value.phi(i).k); });
}

void qte_dataset_free(qte_dataset* ds) { delete ds; }

qte_status qte_dataset_save(const qte_dataset* ds, const char* csv_path,
                            const char* json_path) {
    QTE_REQUIRE(ds);
    QTE_REQUIRE(csv_path);
    QTE_REQUIRE(json_path);
    return guarded([&] { save_dataset(ds->value, csv_path, json_path); });
}

qte_status qte_dataset_load(const char* csv_path, const char* json_path, qte_dataset** out) {
    QTE_REQUIRE(csv_path);
    QTE_REQUIRE(json_path);
    QTE_REQUIRE(out);
    return guarded([&] { *out = new qte_dataset{load_dataset(csv_path, json_path)}; });
}

qte_status qte_dataset_inspect_json(const char* csv_path, const char* json_path, char** out) {
    QTE_REQUIRE(csv_path);
    QTE_REQUIRE(json_path);
    QTE_REQUIRE(out);
    return guarded([&] { *out = dup_string(dataset_inspect_json(csv_path, json_path)); });
}

qte_status qte_empirical_variance(const qte_signal* x, const qte_dataset* ds, double* value,
                                  double* std_error) {
    QTE_REQUIRE(x);
    QTE_REQUIRE(ds);
    QTE_REQUIRE(value);
    return guarded([&] {
        const VarianceEstimate est = empirical_variance(x->value, ds->value);
        *value = est.value;
        if (std_error) *std_error = est.std_error;
    });
}

qte_status qte_maxmax_run(const qte_dataset* ds, const qte_signal* m0, size_t max_steps,
                          qte_maxmax_result** out) {
    QTE_REQUIRE(ds);
    QTE_REQUIRE(out);
    return guarded([&] {
        std::optional<Signal> start;
        if (m0) start = m0->value;
        *out = new qte_maxmax_result{run_maxmax(ds->value, std::move(start), max_steps)};
    });
}

qte_status qte_maxmax_estimate(const qte_maxmax_result* res, qte_signal** out) {
    QTE_REQUIRE(res);
    QTE_REQUIRE(out);
    *out = new qte_signal{res->value.estimate};
    return QTE_OK;
}

qte_status qte_maxmax_steps(const qte_maxmax_result* res, size_t* out) {
    QTE_REQUIRE(res);
    QTE_REQUIRE(out);
    *out = res->value.steps;
    return QTE_OK;
}

qte_status qte_maxmax_converged(const qte_maxmax_result* res, int* out) {
    QTE_REQUIRE(res);
    QTE_REQUIRE(out);
    *out = res->value.converged ? 1 : 0;
    return QTE_OK;
}

qte_status qte_maxmax_final_variance(const qte_maxmax_result* res, double* out) {
    QTE_REQUIRE(res);
    QTE_REQUIRE(out);
    *out = res->value.variance_history.back();
    return QTE_OK;
}

qte_status qte_maxmax_history_len(const qte_maxmax_result* res, size_t* out) {
    QTE_REQUIRE(res);
    QTE_REQUIRE(out);
    *out = res->value.variance_history.size();
    return QTE_OK;
}

qte_status qte_maxmax_history(const qte_maxmax_result* res, double* out, size_t cap) {
    QTE_REQUIRE(res);
    QTE_REQUIRE(out);
    if (cap < res->value.variance_history.size())
        return fail(QTE_ERR_INVALID_ARGUMENT, "output capacity too small");
    std::memcpy(out, res->value.variance_history.data(),
                res->value.variance_history.size() * sizeof(double));
    return QTE_OK;
}

qte_status qte_maxmax_certificate_json(const qte_maxmax_result* res, char** out) {
    QTE_REQUIRE(res);
    QTE_REQUIRE(out);
    return guarded([&] { *out = dup_string(to_json(res->value.certificate).dump(2) + "\n"); });
}

void qte_maxmax_result_free(qte_maxmax_result* res) { delete res; }

qte_status qte_verify_karcher_json(const qte_signal* m, const qte_dataset* ds,
                                   size_t n_perturb, uint64_t seed, char** out) {
    QTE_REQUIRE(m);
    QTE_REQUIRE(ds);
    QTE_REQUIRE(out);
    return guarded([&] {
        const KarcherCertificate cert = verify_karcher(m->value, ds->value, n_perturb, seed);
        *out = dup_string(to_json(cert).dump(2) + "\n");
    });
}

qte_status qte_estimate_h(const qte_signal* v, const qte_signal* t0, double sigma,
                          size_t n_mc, uint64_t seed, double* value, double* std_error) {
    QTE_REQUIRE(v);
    QTE_REQUIRE(t0);
    QTE_REQUIRE(value);
    return guarded([&] {
        const HEstimate est = estimate_h(v->value, t0->value, sigma, n_mc, seed);
        *value = est.value;
        if (std_error) *std_error = est.std_error;
    });
}

qte_status qte_estimate_k(size_t n, size_t n_mc, size_t n_starts, uint64_t seed,
                          qte_k_estimate* out, qte_signal** direction_out) {
    QTE_REQUIRE(out);
    return guarded([&] {
        KEstimate k = estimate_K(n, NoiseSpec{}, n_mc, n_starts, seed);
        out->value = k.value;
        out->std_error = k.std_error;
        out->n_mc = k.n_mc;
        if (direction_out) *direction_out = new qte_signal{std::move(k.argmax_direction)};
    });
}

qte_status qte_estimate_frechet_norm(const qte_signal* t0, double sigma, size_t n_mc,
                                     size_t n_starts, uint64_t seed, double* value,
                                     double* std_error, qte_signal** direction_out) {
    QTE_REQUIRE(t0);
    QTE_REQUIRE(value);
    return guarded([&] {
        FrechetNormEstimate est =
            estimate_frechet_norm(t0->value, sigma, n_mc, n_starts, seed);
        *value = est.value;
        if (std_error) *std_error = est.std_error;
        if (direction_out) *direction_out = new qte_signal{std::move(est.direction)};
    });
}

qte_status qte_bias_report_json(const qte_signal* t0, double sigma, const qte_signal* m_hat,
                                const qte_k_estimate* k, char** out) {
    QTE_REQUIRE(t0);
    QTE_REQUIRE(m_hat);
    QTE_REQUIRE(k);
    QTE_REQUIRE(out);
    return guarded([&] {
        KEstimate kk;
        kk.value = k->value;
        kk.std_error = k->std_error;
        kk.n_mc = k->n_mc;
        const BiasReport report = bias_report(t0->value, sigma, m_hat->value, kk);
        *out = dup_string(to_json(report).dump(2) + "\n");
    });
}

qte_status qte_oracle_mean(const qte_dataset* ds, qte_signal** out) {
    QTE_REQUIRE(ds);
    QTE_REQUIRE(out);
    return guarded([&] { *out = new qte_signal{oracle_mean_known_transforms(ds->value)}; });
}

qte_status qte_config_create(qte_config** out) {
    QTE_REQUIRE(out);
    *out = new qte_config{};
    return QTE_OK;
}

qte_status qte_config_load_file(qte_config* cfg, const char* path) {
    QTE_REQUIRE(cfg);
    QTE_REQUIRE(path);
    return guarded([&] { cfg->value.load_file(path); });
}

qte_status qte_config_set(qte_config* cfg, const char* key, const char* value) {
    QTE_REQUIRE(cfg);
    QTE_REQUIRE(key);
    QTE_REQUIRE(value);
    return guarded([&] { cfg->value.set(key, value); });
}

qte_status qte_config_describe(const qte_config* cfg, char** out) {
    QTE_REQUIRE(cfg);
    QTE_REQUIRE(out);
    return guarded([&] { *out = dup_string(cfg->value.describe()); });
}

void qte_config_free(qte_config* cfg) { delete cfg; }

qte_status qte_run_experiment(const qte_config* cfg, const char* out_dir) {
    return run_command(cfg, out_dir, cmd_experiment);
}

qte_status qte_run_variance_curve(const qte_config* cfg, const char* out_dir) {
    return run_command(cfg, out_dir, cmd_variance_curve);
}

qte_status qte_run_k_sweep(const qte_config* cfg, const char* out_dir) {
    return run_command(cfg, out_dir, cmd_k_sweep);
}

qte_status qte_run_multistart(const qte_config* cfg, const char* out_dir) {
    return run_command(cfg, out_dir, cmd_multistart);
}

qte_status qte_run_dataset_generate(const qte_config* cfg, const char* out_dir) {
    return run_command(cfg, out_dir, cmd_dataset_generate);
}

}  // extern "C"
