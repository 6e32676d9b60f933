// qte command-line harness. Parses flags and a key-value config file, then
// drives the shared library through its C API. Exit codes: 0 success,
// 2 config error, 3 non-convergence, 1 anything else.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qte.h"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "key-value config file");
    cmd->add_option("--out", args.out_dir, "output directory");
    auto push = [&args](const std::string& key) {
        return [&args, key](const std::string& v) { args.overrides.emplace_back(key, v); };
    };
    cmd->add_option_function<std::string>("--seed", push("seed"), "RNG seed");
    cmd->add_option_function<std::string>("--sigma", push("sigma"), "noise level");
    cmd->add_option_function<std::string>("--samples", push("samples"), "observation count");
    cmd->add_option_function<std::string>("--n", push("n"), "signal dimension");
    cmd->add_option_function<std::string>("--template", push("template"),
                                          "template kind: step | smooth | file");
    cmd->add_option_function<std::string>("--template-file", push("template.file"),
                                          "CSV with template values (implies --template file)");
    cmd->add_option_function<std::string>("--max-steps", push("maxmax.max_steps"),
                                          "iteration cap");
    cmd->add_option_function<std::string>("--starts", push("multistart.starts"),
                                          "number of starts");
    cmd->add_option_function<std::string>("--k-mc", push("k.samples"),
                                          "Monte Carlo draws for K");
    cmd->add_option_function<std::string>("--k-starts", push("k.starts"),
                                          "sphere starts for K");
    cmd->add_option_function<std::string>("--sigmas", push("sweep.sigmas"),
                                          "comma list of sweep noise levels");
    cmd->add_flag_callback(
        "--no-plots", [&args] { args.overrides.emplace_back("plots", "false"); },
        "skip SVG emission");
}

int fail_with(qte_status status) {
    std::fprintf(stderr, "error: %s", qte_status_name(status));
    const char* detail = qte_last_error();
    if (detail && detail[0]) std::fprintf(stderr, ": %s", detail);
    std::fprintf(stderr, "\n");
    switch (status) {
        case QTE_ERR_CONFIG:
            return 2;
        case QTE_ERR_NOT_CONVERGED:
            return 3;
        default:
            return 1;
    }
}

class ConfigHandle {
public:
    ConfigHandle() { qte_config_create(&cfg_); }
    ~ConfigHandle() { qte_config_free(cfg_); }
    ConfigHandle(const ConfigHandle&) = delete;
    ConfigHandle& operator=(const ConfigHandle&) = delete;

    qte_status apply(const CommonArgs& args) {
        if (!args.config_path.empty()) {
            const qte_status s = qte_config_load_file(cfg_, args.config_path.c_str());
            if (s != QTE_OK) return s;
        }
        for (const auto& [key, value] : args.overrides) {
            const qte_status s = qte_config_set(cfg_, key.c_str(), value.c_str());
            if (s != QTE_OK) return s;
        }
        return QTE_OK;
    }

    const qte_config* get() const { return cfg_; }

private:
    qte_config* cfg_ = nullptr;
};

int run_command(const CommonArgs& args,
                qte_status (*command)(const qte_config*, const char*)) {
    ConfigHandle cfg;
    qte_status s = cfg.apply(args);
    if (s != QTE_OK) return fail_with(s);
    s = command(cfg.get(), args.out_dir.c_str());
    if (s != QTE_OK) return fail_with(s);
    return 0;
}

int cmd_register(const std::string& x_path, const std::string& y_path, bool exhaustive) {
    qte_signal* x = nullptr;
    qte_signal* y = nullptr;
    qte_status s = qte_signal_load_csv(x_path.c_str(), &x);
    if (s == QTE_OK) s = qte_signal_load_csv(y_path.c_str(), &y);
    qte_registration reg{};
    if (s == QTE_OK)
        s = qte_register_signals(x, y, exhaustive ? QTE_REGISTER_EXHAUSTIVE : QTE_REGISTER_FFT,
                                 &reg);
    qte_signal_free(x);
    qte_signal_free(y);
    if (s != QTE_OK) return fail_with(s);
    std::printf(
        "{\n  \"shift\": %ld,\n  \"distance\": %.17g,\n  \"margin\": %.17g,\n"
        "  \"unique\": %s,\n  \"fft_fallback\": %s\n}\n",
        reg.shift, reg.distance, reg.margin, reg.is_unique ? "true" : "false",
        reg.fft_fallback ? "true" : "false");
    return 0;
}

int cmd_dataset_inspect(const std::string& csv, const std::string& json) {
    char* text = nullptr;
    const qte_status s = qte_dataset_inspect_json(csv.c_str(), json.c_str(), &text);
    if (s != QTE_OK) return fail_with(s);
    std::fputs(text, stdout);
    qte_string_free(text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("qte ") + qte_version() +
                 " — template estimation under cyclic shifts"};
    app.require_subcommand(1);

    CommonArgs experiment_args, curve_args, sweep_args, multi_args, gen_args;

    auto* experiment = app.add_subcommand(
        "experiment", "sample, estimate, certify, and report the bias");
    add_common(experiment, experiment_args);

    auto* curve = app.add_subcommand(
        "variance-curve", "empirical variance at template and estimate vs sample size");
    add_common(curve, curve_args);

    auto* sweep = app.add_subcommand("k-sweep", "bias versus noise level with bounds");
    add_common(sweep, sweep_args);

    auto* multi = app.add_subcommand("multistart", "estimation from many starting points");
    add_common(multi, multi_args);

    auto* dataset = app.add_subcommand("dataset", "generate or inspect datasets");
    dataset->require_subcommand(1);
    auto* gen = dataset->add_subcommand("generate", "sample and serialize a dataset");
    add_common(gen, gen_args);
    std::string inspect_csv, inspect_json;
    auto* inspect = dataset->add_subcommand("inspect", "summarize a serialized dataset");
    inspect->add_option("--csv", inspect_csv, "dataset CSV path")->required();
    inspect->add_option("--json", inspect_json, "dataset JSON header path")->required();

    std::string reg_x, reg_y;
    bool reg_exhaustive = false;
    auto* reg = app.add_subcommand("register", "align two signals from CSV files");
    reg->add_option("--x", reg_x, "reference signal CSV")->required();
    reg->add_option("--y", reg_y, "signal to align, CSV")->required();
    reg->add_flag("--exhaustive", reg_exhaustive, "use the exhaustive search");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (experiment->parsed()) return run_command(experiment_args, qte_run_experiment);
    if (curve->parsed()) return run_command(curve_args, qte_run_variance_curve);
    if (sweep->parsed()) return run_command(sweep_args, qte_run_k_sweep);
    if (multi->parsed()) return run_command(multi_args, qte_run_multistart);
    if (gen->parsed()) return run_command(gen_args, qte_run_dataset_generate);
    if (inspect->parsed()) return cmd_dataset_inspect(inspect_csv, inspect_json);
    if (reg->parsed()) return cmd_register(reg_x, reg_y, reg_exhaustive);
    return 2;
}
