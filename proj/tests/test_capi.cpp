// Exercises the shared-library surface the way an external client would:
// only qte.h, opaque handles, and status codes.

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "qte.h"

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("qte_capi_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(qte_version()) == "0.1.0");
    CHECK(std::string(qte_status_name(QTE_OK)) == "ok");
    CHECK(std::string(qte_status_name(QTE_ERR_CONFIG)) == "config error");
}

TEST_CASE("signals: create, inspect, errors") {
    const double values[4] = {1.0, 2.0, 3.0, 4.0};
    qte_signal* sig = nullptr;
    REQUIRE(qte_signal_create(values, 4, &sig) == QTE_OK);
    size_t len = 0;
    CHECK(qte_signal_len(sig, &len) == QTE_OK);
    CHECK(len == 4);
    double out[4];
    CHECK(qte_signal_values(sig, out, 4) == QTE_OK);
    CHECK(std::memcmp(out, values, sizeof(values)) == 0);
    double nrm = 0.0;
    CHECK(qte_signal_norm(sig, &nrm) == QTE_OK);
    CHECK(nrm == doctest::Approx(std::sqrt(30.0)));

    double small[2];
    CHECK(qte_signal_values(sig, small, 2) == QTE_ERR_INVALID_ARGUMENT);
    CHECK(std::string(qte_last_error()).size() > 0);
    qte_signal_free(sig);

    qte_signal* bad = nullptr;
    const double nan_values[2] = {1.0, std::nan("")};
    CHECK(qte_signal_create(nan_values, 2, &bad) == QTE_ERR_INVALID_ARGUMENT);
    CHECK(qte_signal_create(values, 1, &bad) == QTE_ERR_INVALID_ARGUMENT);
    CHECK(qte_signal_create(nullptr, 4, &bad) == QTE_ERR_INVALID_ARGUMENT);
}

TEST_CASE("templates and registration through the C API") {
    qte_signal* t0 = nullptr;
    REQUIRE(qte_template_step(8, 2, 2, 1.0, &t0) == QTE_OK);
    double values[8];
    CHECK(qte_signal_values(t0, values, 8) == QTE_OK);
    CHECK(values[2] == 1.0);
    CHECK(values[0] == 0.0);

    qte_signal* shifted = nullptr;
    REQUIRE(qte_apply_shift(t0, 3, &shifted) == QTE_OK);

    qte_registration reg{};
    REQUIRE(qte_register_signals(t0, shifted, QTE_REGISTER_FFT, &reg) == QTE_OK);
    CHECK(reg.shift == 5);  // inverse of 3 mod 8
    CHECK(reg.distance <= 1e-9);
    CHECK(reg.is_unique);
    CHECK(!reg.fft_fallback);

    qte_registration ex{};
    REQUIRE(qte_register_signals(t0, shifted, QTE_REGISTER_EXHAUSTIVE, &ex) == QTE_OK);
    CHECK(ex.shift == reg.shift);

    double dq = 0.0;
    CHECK(qte_quotient_distance(t0, shifted, &dq) == QTE_OK);
    CHECK(dq <= 1e-9);

    int fixed = -1;
    CHECK(qte_is_fixed_point(t0, 1e-9, &fixed) == QTE_OK);
    CHECK(fixed == 0);
    int unique = -1;
    CHECK(qte_is_unique_registration(t0, shifted, -1.0, &unique) == QTE_OK);
    CHECK(unique == 1);

    // Negative shifts wrap.
    qte_signal* neg = nullptr;
    REQUIRE(qte_apply_shift(t0, -5, &neg) == QTE_OK);
    double a[8], b[8];
    qte_signal_values(shifted, a, 8);
    qte_signal_values(neg, b, 8);
    CHECK(std::memcmp(a, b, sizeof(a)) == 0);

    // Dimension mismatch surfaces as the dedicated status.
    qte_signal* other = nullptr;
    REQUIRE(qte_template_step(16, 2, 2, 1.0, &other) == QTE_OK);
    CHECK(qte_register_signals(t0, other, QTE_REGISTER_FFT, &reg) ==
          QTE_ERR_DIMENSION_MISMATCH);

    qte_signal_free(t0);
    qte_signal_free(shifted);
    qte_signal_free(neg);
    qte_signal_free(other);
}

TEST_CASE("datasets, estimation, and reports through the C API") {
    TempDir tmp;
    qte_signal* t0 = nullptr;
    REQUIRE(qte_template_step(16, 4, 4, 1.0, &t0) == QTE_OK);

    qte_dataset* ds = nullptr;
    REQUIRE(qte_dataset_sample(t0, 1.0, 200, 7, 1, &ds) == QTE_OK);
    size_t count = 0, dim = 0;
    CHECK(qte_dataset_size(ds, &count) == QTE_OK);
    CHECK(count == 200);
    CHECK(qte_dataset_dim(ds, &dim) == QTE_OK);
    CHECK(dim == 16);
    long phi = -1;
    CHECK(qte_dataset_phi(ds, 0, &phi) == QTE_OK);
    CHECK(phi >= 0);
    CHECK(phi < 16);

    // Serialization round trip.
    REQUIRE(qte_dataset_save(ds, tmp.file("d.csv").c_str(), tmp.file("d.json").c_str()) ==
            QTE_OK);
    qte_dataset* loaded = nullptr;
    REQUIRE(qte_dataset_load(tmp.file("d.csv").c_str(), tmp.file("d.json").c_str(), &loaded) ==
            QTE_OK);
    qte_signal* y0 = nullptr;
    qte_signal* y0_loaded = nullptr;
    REQUIRE(qte_dataset_observation(ds, 0, &y0) == QTE_OK);
    REQUIRE(qte_dataset_observation(loaded, 0, &y0_loaded) == QTE_OK);
    double va[16], vb[16];
    qte_signal_values(y0, va, 16);
    qte_signal_values(y0_loaded, vb, 16);
    CHECK(std::memcmp(va, vb, sizeof(va)) == 0);

    char* inspect = nullptr;
    REQUIRE(qte_dataset_inspect_json(tmp.file("d.csv").c_str(), tmp.file("d.json").c_str(),
                                     &inspect) == QTE_OK);
    CHECK(std::string(inspect).find("\"count\": 200") != std::string::npos);
    qte_string_free(inspect);

    // Estimation.
    qte_maxmax_result* res = nullptr;
    REQUIRE(qte_maxmax_run(ds, nullptr, 10000, &res) == QTE_OK);
    int converged = 0;
    CHECK(qte_maxmax_converged(res, &converged) == QTE_OK);
    CHECK(converged == 1);
    size_t steps = 0, hist_len = 0;
    CHECK(qte_maxmax_steps(res, &steps) == QTE_OK);
    CHECK(steps >= 1);
    CHECK(qte_maxmax_history_len(res, &hist_len) == QTE_OK);
    std::vector<double> hist(hist_len);
    CHECK(qte_maxmax_history(res, hist.data(), hist_len) == QTE_OK);
    for (size_t i = 0; i + 1 < hist_len; ++i) CHECK(hist[i + 1] <= hist[i]);
    double final_variance = 0.0;
    CHECK(qte_maxmax_final_variance(res, &final_variance) == QTE_OK);
    CHECK(final_variance == hist.back());

    qte_signal* estimate = nullptr;
    REQUIRE(qte_maxmax_estimate(res, &estimate) == QTE_OK);
    double value = 0.0, std_error = 0.0;
    CHECK(qte_empirical_variance(estimate, ds, &value, &std_error) == QTE_OK);
    CHECK(value == doctest::Approx(final_variance).epsilon(1e-12));

    char* cert = nullptr;
    REQUIRE(qte_maxmax_certificate_json(res, &cert) == QTE_OK);
    CHECK(std::string(cert).find("all_unique") != std::string::npos);
    qte_string_free(cert);

    char* karcher = nullptr;
    REQUIRE(qte_verify_karcher_json(estimate, ds, 10, 3, &karcher) == QTE_OK);
    CHECK(std::string(karcher).find("\"perturbation_checked\": true") != std::string::npos);
    qte_string_free(karcher);

    // Oracle mean and bias report.
    qte_signal* oracle = nullptr;
    REQUIRE(qte_oracle_mean(ds, &oracle) == QTE_OK);
    qte_k_estimate k{};
    REQUIRE(qte_estimate_k(16, 2000, 3, 11, &k, nullptr) == QTE_OK);
    CHECK(k.value > 0.0);
    CHECK(k.value <= 1.0 + 3.0 * k.std_error);
    char* report = nullptr;
    REQUIRE(qte_bias_report_json(t0, 1.0, estimate, &k, &report) == QTE_OK);
    CHECK(std::string(report).find("\"EB\"") != std::string::npos);
    qte_string_free(report);

    double h_value = 0.0, h_se = 0.0;
    qte_signal* v = nullptr;
    qte_k_estimate k2{};
    REQUIRE(qte_estimate_k(16, 2000, 3, 11, &k2, &v) == QTE_OK);
    CHECK(k2.value == k.value);  // deterministic
    REQUIRE(qte_estimate_h(v, t0, 1.0, 2000, 5, &h_value, &h_se) == QTE_OK);
    CHECK(h_value > 0.0);

    double fn_value = 0.0, fn_se = 0.0;
    REQUIRE(qte_estimate_frechet_norm(t0, 1.0, 2000, 3, 5, &fn_value, &fn_se, nullptr) ==
            QTE_OK);
    CHECK(fn_value > 0.0);

    // Missing hidden transforms surface as the dedicated status.
    qte_dataset* blind = nullptr;
    REQUIRE(qte_dataset_sample(t0, 1.0, 10, 7, 0, &blind) == QTE_OK);
    CHECK(qte_dataset_phi(blind, 0, &phi) == QTE_ERR_MISSING_HIDDEN);
    qte_signal* no_oracle = nullptr;
    CHECK(qte_oracle_mean(blind, &no_oracle) == QTE_ERR_MISSING_HIDDEN);

    qte_signal_free(v);
    qte_signal_free(oracle);
    qte_signal_free(estimate);
    qte_signal_free(y0);
    qte_signal_free(y0_loaded);
    qte_signal_free(t0);
    qte_maxmax_result_free(res);
    qte_dataset_free(ds);
    qte_dataset_free(loaded);
    qte_dataset_free(blind);
}

TEST_CASE("harness commands through the C API") {
    TempDir tmp;
    qte_config* cfg = nullptr;
    REQUIRE(qte_config_create(&cfg) == QTE_OK);
    CHECK(qte_config_set(cfg, "n", "16") == QTE_OK);
    CHECK(qte_config_set(cfg, "template.start", "4") == QTE_OK);
    CHECK(qte_config_set(cfg, "template.length", "4") == QTE_OK);
    CHECK(qte_config_set(cfg, "sigma", "1.0") == QTE_OK);
    CHECK(qte_config_set(cfg, "samples", "200") == QTE_OK);
    CHECK(qte_config_set(cfg, "k.samples", "2000") == QTE_OK);
    CHECK(qte_config_set(cfg, "k.starts", "3") == QTE_OK);
    CHECK(qte_config_set(cfg, "karcher.perturbations", "5") == QTE_OK);
    CHECK(qte_config_set(cfg, "nonsense", "1") == QTE_ERR_CONFIG);

    char* desc = nullptr;
    REQUIRE(qte_config_describe(cfg, &desc) == QTE_OK);
    CHECK(std::string(desc).find("samples = 200") != std::string::npos);
    qte_string_free(desc);

    CHECK(qte_run_experiment(cfg, tmp.file("exp").c_str()) == QTE_OK);
    CHECK(fs::exists(tmp.file("exp") + "/report.json"));

    // A step cap of 1 cannot re-confirm the registration vector.
    CHECK(qte_config_set(cfg, "maxmax.max_steps", "1") == QTE_OK);
    CHECK(qte_run_experiment(cfg, tmp.file("exp2").c_str()) == QTE_ERR_NOT_CONVERGED);
    CHECK(fs::exists(tmp.file("exp2") + "/report.json"));  // artifacts still written

    qte_config_free(cfg);
}
