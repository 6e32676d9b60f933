#include <unistd.h>

#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qte/harness.hpp"
#include "qte/io.hpp"
#include "qte/quotient.hpp"

using namespace qte;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("qte_harness_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string dir(const std::string& name) const { return (path / name).string(); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Small config so harness tests run in seconds.
ExperimentConfig tiny_config() {
    ExperimentConfig cfg;
    cfg.set("n", "16");  // step support scales to [4, 8)
    cfg.sigma = 1.0;
    cfg.samples = 300;
    cfg.seed = 5;
    cfg.k_n_mc = 2000;
    cfg.k_starts = 3;
    cfg.multistart_starts = 4;
    cfg.karcher_perturbations = 10;
    return cfg;
}

}  // namespace

TEST_CASE("config: set and load_file") {
    ExperimentConfig cfg;
    cfg.set("sigma", "2.5");
    cfg.set("samples", "123");
    cfg.set("template", "smooth");
    cfg.set("template.frequencies", "1,2");
    cfg.set("template.amplitudes", "1.0,0.5");
    cfg.set("n", "32");
    CHECK(cfg.sigma == 2.5);
    CHECK(cfg.samples == 123);
    CHECK(cfg.template_spec.kind == TemplateSpec::Kind::smooth);
    CHECK(cfg.template_spec.frequencies == std::vector<double>{1.0, 2.0});
    CHECK(cfg.template_spec.n == 32);

    CHECK_THROWS_AS(cfg.set("unknown.key", "1"), ConfigError);
    CHECK_THROWS_AS(cfg.set("sigma", "banana"), ConfigError);
    CHECK_THROWS_AS(cfg.set("sigma", "-2"), ConfigError);
    CHECK_THROWS_AS(cfg.set("samples", "0"), ConfigError);
    CHECK_THROWS_AS(cfg.set("template", "wiggle"), ConfigError);

    TempDir tmp;
    write_text_file(tmp.file("run.cfg"),
                    "# comment\n"
                    "sigma = 4.0\n"
                    "seed = 9\n"
                    "plots = false\n");
    ExperimentConfig from_file;
    from_file.load_file(tmp.file("run.cfg"));
    CHECK(from_file.sigma == 4.0);
    CHECK(from_file.seed == 9);
    CHECK(!from_file.emit_plots);

    write_text_file(tmp.file("bad.cfg"), "sigma 4.0\n");
    CHECK_THROWS_AS(from_file.load_file(tmp.file("bad.cfg")), ConfigError);
    CHECK_THROWS_AS(from_file.load_file(tmp.file("missing.cfg")), ConfigError);

    const std::string desc = from_file.describe();
    CHECK(desc.find("sigma = 4") != std::string::npos);
    CHECK(desc.find("plots = false") != std::string::npos);
}

TEST_CASE("cmd_experiment: artifacts, determinism, and report contents") {
    TempDir tmp;
    const ExperimentConfig cfg = tiny_config();

    const CommandResult res = cmd_experiment(cfg, tmp.dir("run1"));
    CHECK(res.converged);
    CHECK(fs::exists(tmp.dir("run1") + "/report.json"));
    CHECK(fs::exists(tmp.dir("run1") + "/maxmax_trace.csv"));
    CHECK(fs::exists(tmp.dir("run1") + "/overlay.svg"));

    const json report = json::parse(read_text_file(tmp.dir("run1") + "/report.json"));
    CHECK(report.at("schema_version").get<int>() == 1);
    CHECK(report.at("maxmax").at("converged").get<bool>());
    CHECK(report.at("bias").contains("EB_over_sigma"));
    CHECK(report.at("bias").at("K").at("value").get<double>() > 0.0);
    CHECK(report.at("certificate").at("all_unique").get<bool>());
    CHECK(!report.at("oracle").is_null());

    // Identical config, fresh directory: byte-identical CSV/JSON artifacts.
    cmd_experiment(cfg, tmp.dir("run2"));
    CHECK(read_text_file(tmp.dir("run1") + "/report.json") ==
          read_text_file(tmp.dir("run2") + "/report.json"));
    CHECK(read_text_file(tmp.dir("run1") + "/maxmax_trace.csv") ==
          read_text_file(tmp.dir("run2") + "/maxmax_trace.csv"));
    CHECK(read_text_file(tmp.dir("run1") + "/overlay.svg") ==
          read_text_file(tmp.dir("run2") + "/overlay.svg"));

    // The trace CSV holds the documented header.
    const std::string trace = read_text_file(tmp.dir("run1") + "/maxmax_trace.csv");
    CHECK(trace.rfind("step,F_I,n_registrations_changed,n_ties", 0) == 0);
}

TEST_CASE("cmd_experiment: sigma = 0 gives zero bias") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    cfg.sigma = 0.0;
    cfg.samples = 60;
    const CommandResult res = cmd_experiment(cfg, tmp.dir("zero"));
    CHECK(res.converged);
    const json report = json::parse(read_text_file(tmp.dir("zero") + "/report.json"));
    CHECK(report.at("bias").at("EB").get<double>() <= 1e-9);
    CHECK(report.at("bias").at("EB_over_sigma").get<double>() == 0.0);
    CHECK(report.at("bias").at("bounds_satisfied").get<bool>());
}

TEST_CASE("cmd_variance_curve: final row matches a direct recomputation") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    cfg.samples = 500;
    cmd_variance_curve(cfg, tmp.dir("curve"));
    const std::string csv = read_text_file(tmp.dir("curve") + "/variance_curve.csv");
    CHECK(csv.rfind("I,point_label,F_I,std_error", 0) == 0);

    // Parse the final template row and compare bitwise with a recomputation.
    const Signal t0 = cfg.resolve_template();
    const Dataset ds = Dataset::sample(t0, cfg.sigma, cfg.samples, cfg.seed, cfg.keep_hidden);
    const VarianceEstimate direct = empirical_variance(t0, ds);

    double final_template_value = -1.0;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const auto c3 = line.find(',', c2 + 1);
        const std::string count = line.substr(0, c1);
        const std::string label = line.substr(c1 + 1, c2 - c1 - 1);
        if (label == "template" && count == std::to_string(cfg.samples))
            final_template_value = parse_double(line.substr(c2 + 1, c3 - c2 - 1));
    }
    CHECK(final_template_value == direct.value);
}

TEST_CASE("cmd_variance_curve: sigma = 0 template curve is zero") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    cfg.sigma = 0.0;
    cfg.samples = 100;
    cmd_variance_curve(cfg, tmp.dir("curve0"));
    const std::string csv = read_text_file(tmp.dir("curve0") + "/variance_curve.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.find("template") == std::string::npos) continue;
        const auto c2 = line.find(',', line.find(',') + 1);
        const auto c3 = line.find(',', c2 + 1);
        CHECK(parse_double(line.substr(c2 + 1, c3 - c2 - 1)) <= 1e-10);
    }
}

TEST_CASE("cmd_k_sweep: rows, zero row, and bounds") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    cfg.samples = 400;
    cfg.sweep_sigmas = {0.0, 1.0, 2.0};
    cmd_k_sweep(cfg, tmp.dir("sweep"));
    const std::string csv = read_text_file(tmp.dir("sweep") + "/k_sweep.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("sigma,EB,", 0) == 0);
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.rfind("0,", 0) == 0) {
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            CHECK(parse_double(line.substr(c1 + 1, c2 - c1 - 1)) <= 1e-9);  // EB at sigma 0
        }
    }
    CHECK(rows == 3);

    ExperimentConfig bad = cfg;
    bad.sweep_sigmas = {1.0};
    CHECK_THROWS_AS(cmd_k_sweep(bad, tmp.dir("sweep_bad")), ConfigError);
}

TEST_CASE("cmd_multistart: table invariants") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    cfg.sigma = 5.0;
    cfg.samples = 200;
    cfg.multistart_starts = 6;
    cmd_multistart(cfg, tmp.dir("multi"));
    const std::string csv = read_text_file(tmp.dir("multi") + "/multistart.csv");
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "start_id,final_F_I,steps,converged,estimate_norm");
    std::vector<double> finals;
    bool has_default = false;
    while (std::getline(in, line)) {
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        if (line.substr(0, c1) == "0") has_default = true;
        finals.push_back(parse_double(line.substr(c1 + 1, c2 - c1 - 1)));
    }
    CHECK(finals.size() == 6);
    CHECK(has_default);
    for (std::size_t i = 0; i + 1 < finals.size(); ++i) CHECK(finals[i] <= finals[i + 1]);
    CHECK(fs::exists(tmp.dir("multi") + "/multistart_pairwise.csv"));
    CHECK(fs::exists(tmp.dir("multi") + "/multistart_hist.svg"));
}

TEST_CASE("cmd_dataset_generate and inspection") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    cfg.samples = 50;
    cmd_dataset_generate(cfg, tmp.dir("data"));
    const std::string summary =
        dataset_inspect_json(tmp.dir("data") + "/dataset.csv", tmp.dir("data") + "/dataset.json");
    const json j = json::parse(summary);
    CHECK(j.at("count").get<std::size_t>() == 50);
    CHECK(j.at("n").get<std::size_t>() == 16);
    CHECK(j.at("has_phi").get<bool>());
    CHECK(j.at("moments").at("mean_sq_norm").get<double>() > 0.0);
}

TEST_CASE("no-plots config skips SVG artifacts") {
    TempDir tmp;
    ExperimentConfig cfg = tiny_config();
    cfg.emit_plots = false;
    cmd_experiment(cfg, tmp.dir("noplots"));
    CHECK(fs::exists(tmp.dir("noplots") + "/report.json"));
    CHECK(!fs::exists(tmp.dir("noplots") + "/overlay.svg"));
}
