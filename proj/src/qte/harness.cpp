#include "qte/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "qte/io.hpp"
#include "qte/oracle.hpp"
#include "qte/quotient.hpp"
#include "qte/rng.hpp"
#include "qte/svg.hpp"

namespace qte {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kTagKEstimate = 201;
constexpr std::uint64_t kTagKarcher = 202;
constexpr std::uint64_t kTagMultiStart = 203;

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, ',')) {
        if (token.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(parse_double(token));
    }
    return out;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    try {
        const long long v = std::stoll(value);
        if (v < 0) throw ConfigError(key + " must be nonnegative");
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("bad integer for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("bad boolean for " + key + ": '" + value + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

fs::path prepare_out_dir(const std::string& out_dir) {
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + out_dir);
    return dir;
}

std::string list_join(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += g17(values[i]);
    }
    return out;
}

json config_json(const ExperimentConfig& cfg) {
    json j;
    j["template_spec"] = to_json(cfg.resolved_spec());
    if (!cfg.template_file.empty()) j["template_file"] = cfg.template_file;
    j["sigma"] = cfg.sigma;
    j["samples"] = cfg.samples;
    j["seed"] = cfg.seed;
    j["keep_hidden"] = cfg.keep_hidden;
    j["maxmax_max_steps"] = cfg.max_steps;
    j["multistart_starts"] = cfg.multistart_starts;
    j["k_samples"] = cfg.k_n_mc;
    j["k_starts"] = cfg.k_starts;
    j["karcher_perturbations"] = cfg.karcher_perturbations;
    j["sweep_sigmas"] = cfg.sweep_sigmas;
    return j;
}

std::string trace_csv(const MaxMaxResult& res) {
    std::string csv = "step,F_I,n_registrations_changed,n_ties\n";
    for (const auto& row : res.trace) {
        csv += std::to_string(row.step) + ',' + g17(row.variance) + ',' +
               std::to_string(row.registrations_changed) + ',' + std::to_string(row.ties) + '\n';
    }
    return csv;
}

svg::Series signal_series(const std::string& label, const std::string& color,
                          std::span<const double> x) {
    svg::Series s;
    s.label = label;
    s.color = color;
    s.x.resize(x.size());
    s.y.assign(x.begin(), x.end());
    for (std::size_t j = 0; j < x.size(); ++j) s.x[j] = static_cast<double>(j);
    return s;
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    try {
        if (key == "template") {
            if (value == "step") {
                template_spec.kind = TemplateSpec::Kind::step;
                template_spec.height = TemplateSpec::step_default().height;
                step_start.reset();
                step_length.reset();
                template_file.clear();
            } else if (value == "smooth") {
                template_spec.kind = TemplateSpec::Kind::smooth;
                template_file.clear();
            } else if (value == "file") {
                template_spec.kind = TemplateSpec::Kind::custom;
            } else {
                throw ConfigError("template must be step, smooth or file");
            }
        } else if (key == "template.start") {
            step_start = parse_count(key, value);
        } else if (key == "template.length") {
            step_length = parse_count(key, value);
        } else if (key == "template.height") {
            template_spec.height = parse_double(value);
        } else if (key == "template.frequencies") {
            template_spec.frequencies = parse_double_list(value);
        } else if (key == "template.amplitudes") {
            template_spec.amplitudes = parse_double_list(value);
        } else if (key == "template.file") {
            template_spec.kind = TemplateSpec::Kind::custom;
            template_file = value;
        } else if (key == "n") {
            template_spec.n = parse_count(key, value);
            if (template_spec.n < 2) throw ConfigError("n must be >= 2");
        } else if (key == "sigma") {
            sigma = parse_double(value);
            if (sigma < 0.0) throw ConfigError("sigma must be nonnegative");
        } else if (key == "samples") {
            samples = parse_count(key, value);
            if (samples < 1) throw ConfigError("samples must be >= 1");
        } else if (key == "seed") {
            seed = static_cast<std::uint64_t>(std::stoull(value));
        } else if (key == "keep_hidden") {
            keep_hidden = parse_bool(key, value);
        } else if (key == "maxmax.max_steps") {
            max_steps = parse_count(key, value);
            if (max_steps < 1) throw ConfigError("maxmax.max_steps must be >= 1");
        } else if (key == "multistart.starts") {
            multistart_starts = parse_count(key, value);
            if (multistart_starts < 1) throw ConfigError("multistart.starts must be >= 1");
        } else if (key == "k.samples") {
            k_n_mc = parse_count(key, value);
        } else if (key == "k.starts") {
            k_starts = parse_count(key, value);
        } else if (key == "karcher.perturbations") {
            karcher_perturbations = parse_count(key, value);
        } else if (key == "sweep.sigmas") {
            sweep_sigmas = parse_double_list(value);
            for (double s : sweep_sigmas)
                if (s < 0.0) throw ConfigError("sweep sigmas must be nonnegative");
        } else if (key == "plots") {
            emit_plots = parse_bool(key, value);
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("bad value for " + key + ": " + e.what());
    }
}

void ExperimentConfig::load_file(const std::string& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

TemplateSpec ExperimentConfig::resolved_spec() const {
    TemplateSpec spec = template_spec;
    if (spec.kind == TemplateSpec::Kind::custom) {
        if (template_file.empty())
            throw ConfigError("template = file requires template.file");
        spec.values = load_signal_csv(template_file);
        spec.n = spec.values.size();
        return spec;
    }
    spec.start = step_start.value_or(spec.n / 4);
    spec.length = step_length.value_or(std::max<std::size_t>(1, spec.n / 4));
    return spec;
}

Signal ExperimentConfig::resolve_template() const {
    try {
        return make_template(resolved_spec());
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

std::string ExperimentConfig::describe() const {
    std::string out;
    switch (template_spec.kind) {
        case TemplateSpec::Kind::step: {
            const std::size_t n = template_spec.n;
            out += "template = step\n";
            out += "template.start = " + std::to_string(step_start.value_or(n / 4)) + '\n';
            out += "template.length = " +
                   std::to_string(step_length.value_or(std::max<std::size_t>(1, n / 4))) + '\n';
            out += "template.height = " + g17(template_spec.height) + '\n';
            break;
        }
        case TemplateSpec::Kind::smooth:
            out += "template = smooth\n";
            out += "template.frequencies = " + list_join(template_spec.frequencies) + '\n';
            out += "template.amplitudes = " + list_join(template_spec.amplitudes) + '\n';
            break;
        case TemplateSpec::Kind::custom:
            out += "template = file\n";
            out += "template.file = " + template_file + '\n';
            break;
    }
    out += "n = " + std::to_string(template_spec.n) + '\n';
    out += "sigma = " + g17(sigma) + '\n';
    out += "samples = " + std::to_string(samples) + '\n';
    out += "seed = " + std::to_string(seed) + '\n';
    out += std::string("keep_hidden = ") + (keep_hidden ? "true" : "false") + '\n';
    out += "maxmax.max_steps = " + std::to_string(max_steps) + '\n';
    out += "multistart.starts = " + std::to_string(multistart_starts) + '\n';
    out += "k.samples = " + std::to_string(k_n_mc) + '\n';
    out += "k.starts = " + std::to_string(k_starts) + '\n';
    out += "karcher.perturbations = " + std::to_string(karcher_perturbations) + '\n';
    out += "sweep.sigmas = " + list_join(sweep_sigmas) + '\n';
    out += std::string("plots = ") + (emit_plots ? "true" : "false") + '\n';
    return out;
}

CommandResult cmd_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const Signal t0 = cfg.resolve_template();
    const Dataset ds = Dataset::sample(t0, cfg.sigma, cfg.samples, cfg.seed, cfg.keep_hidden);

    MaxMaxResult res = run_maxmax(ds, std::nullopt, cfg.max_steps);
    const KarcherCertificate cert = verify_karcher(
        res.estimate, ds, cfg.karcher_perturbations, derive_seed(cfg.seed, kTagKarcher));
    const KEstimate K = estimate_K(ds.dim(), NoiseSpec{}, cfg.k_n_mc, cfg.k_starts,
                                   derive_seed(cfg.seed, kTagKEstimate));
    const BiasReport bias = bias_report(t0, cfg.sigma, res.estimate, K);

    json report;
    report["schema_version"] = kSchemaVersion;
    report["config"] = config_json(cfg);
    report["maxmax"] = {{"steps", res.steps},
                        {"converged", res.converged},
                        {"final_variance", res.variance_history.back()},
                        {"estimate", res.estimate}};
    report["certificate"] = to_json(cert);
    report["bias"] = to_json(bias);

    std::optional<Signal> oracle;
    if (ds.has_hidden_transforms()) {
        oracle = oracle_mean_known_transforms(ds);
        const double oracle_eb = quotient_distance(t0, *oracle);
        report["oracle"] = {{"EB", oracle_eb},
                            {"EB_over_sigma", cfg.sigma > 0.0 ? oracle_eb / cfg.sigma : 0.0}};
    } else {
        report["oracle"] = nullptr;
    }

    CommandResult out;
    out.converged = res.converged;
    write_text_file((dir / "report.json").string(), report.dump(2) + "\n");
    out.artifacts.push_back("report.json");
    write_text_file((dir / "maxmax_trace.csv").string(), trace_csv(res));
    out.artifacts.push_back("maxmax_trace.csv");

    if (cfg.emit_plots) {
        // Align the estimate (and oracle) to the template for the overlay.
        const Registration reg = register_fft(t0, res.estimate);
        const Signal aligned = act(reg.element, res.estimate);
        std::vector<svg::Series> series;
        series.push_back(signal_series("template", "#1f77b4", t0));
        series.push_back(signal_series("estimate", "#d62728", aligned));
        if (oracle) {
            series.push_back(signal_series("oracle mean", "#2ca02c", *oracle));
        }
        svg::PlotOptions opts;
        opts.title = "template vs estimate";
        opts.x_label = "index";
        opts.y_label = "value";
        write_text_file((dir / "overlay.svg").string(), svg::line_plot(series, opts));
        out.artifacts.push_back("overlay.svg");
    }
    return out;
}

CommandResult cmd_variance_curve(const ExperimentConfig& cfg, const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const Signal t0 = cfg.resolve_template();
    const Dataset ds = Dataset::sample(t0, cfg.sigma, cfg.samples, cfg.seed, cfg.keep_hidden);
    MaxMaxResult res = run_maxmax(ds, std::nullopt, cfg.max_steps);

    const auto checkpoints = log_checkpoints(ds.size());
    const auto rows = variance_curve({{"template", t0}, {"estimate", res.estimate}}, ds,
                                     checkpoints);

    std::string csv = "I,point_label,F_I,std_error\n";
    for (const auto& row : rows)
        csv += std::to_string(row.checkpoint) + ',' + row.label + ',' + g17(row.value) + ',' +
               g17(row.std_error) + '\n';

    CommandResult out;
    out.converged = res.converged;
    write_text_file((dir / "variance_curve.csv").string(), csv);
    out.artifacts.push_back("variance_curve.csv");

    if (cfg.emit_plots) {
        svg::Series st, se;
        st.label = "F_I(template)";
        st.color = "#1f77b4";
        se.label = "F_I(estimate)";
        se.color = "#d62728";
        for (const auto& row : rows) {
            auto& s = row.label == "template" ? st : se;
            s.x.push_back(static_cast<double>(row.checkpoint));
            s.y.push_back(row.value);
        }
        svg::PlotOptions opts;
        opts.title = "empirical variance vs sample size";
        opts.x_label = "log10 I";
        opts.y_label = "F_I";
        opts.log_x = true;
        write_text_file((dir / "variance_curve.svg").string(), svg::line_plot({st, se}, opts));
        out.artifacts.push_back("variance_curve.svg");
    }
    return out;
}

CommandResult cmd_k_sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
    if (cfg.sweep_sigmas.size() < 2) throw ConfigError("k-sweep needs at least two sigmas");
    const fs::path dir = prepare_out_dir(out_dir);
    const Signal t0 = cfg.resolve_template();
    const double t0_norm = norm(t0);
    // K depends only on the noise law and the dimension, so it is estimated
    // once and shared across the sweep.
    const KEstimate K = estimate_K(t0.size(), NoiseSpec{}, cfg.k_n_mc, cfg.k_starts,
                                   derive_seed(cfg.seed, kTagKEstimate));

    std::string csv =
        "sigma,EB,EB_over_sigma,K,K_std_error,lower_bound,upper_bound,slack,bounds_satisfied,"
        "converged,steps\n";
    svg::Series eb_series{"EB", "#d62728", {}, {}, false};
    svg::Series lo_series{"band low", "#1f77b4", {}, {}, true};
    svg::Series hi_series{"band high", "#1f77b4", {}, {}, true};

    CommandResult out;
    for (const double sigma : cfg.sweep_sigmas) {
        // Same seed for every sigma: common phi/eps draws across the sweep.
        const Dataset ds = Dataset::sample(t0, sigma, cfg.samples, cfg.seed, false);
        const MaxMaxResult res = run_maxmax(ds, std::nullopt, cfg.max_steps);
        out.converged = out.converged && res.converged;
        const BiasReport r = bias_report(t0, sigma, res.estimate, K);
        csv += g17(sigma) + ',' + g17(r.EB) + ',' + g17(r.EB_over_sigma) + ',' + g17(K.value) +
               ',' + g17(K.std_error) + ',' + g17(r.lower_bound) + ',' + g17(r.upper_bound) +
               ',' + g17(r.slack) + ',' + (r.bounds_satisfied ? "true" : "false") + ',' +
               (res.converged ? "true" : "false") + ',' + std::to_string(res.steps) + '\n';
        eb_series.x.push_back(sigma);
        eb_series.y.push_back(r.EB);
        lo_series.x.push_back(sigma);
        lo_series.y.push_back(sigma * K.value - 2.0 * t0_norm);
        hi_series.x.push_back(sigma);
        hi_series.y.push_back(sigma * K.value + 2.0 * t0_norm);
    }

    write_text_file((dir / "k_sweep.csv").string(), csv);
    out.artifacts.push_back("k_sweep.csv");
    if (cfg.emit_plots) {
        svg::PlotOptions opts;
        opts.title = "bias vs noise level";
        opts.x_label = "sigma";
        opts.y_label = "EB";
        write_text_file((dir / "k_sweep.svg").string(),
                        svg::line_plot({eb_series, lo_series, hi_series}, opts));
        out.artifacts.push_back("k_sweep.svg");
    }
    return out;
}

CommandResult cmd_multistart(const ExperimentConfig& cfg, const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const Signal t0 = cfg.resolve_template();
    const Dataset ds = Dataset::sample(t0, cfg.sigma, cfg.samples, cfg.seed, false);
    const auto runs = multi_start(ds, cfg.multistart_starts,
                                  derive_seed(cfg.seed, kTagMultiStart), cfg.max_steps);

    std::string csv = "start_id,final_F_I,steps,converged,estimate_norm\n";
    std::vector<double> final_variances;
    CommandResult out;
    for (const auto& run : runs) {
        const double fv = run.result.variance_history.back();
        final_variances.push_back(fv);
        out.converged = out.converged && run.result.converged;
        csv += std::to_string(run.start_index) + ',' + g17(fv) + ',' +
               std::to_string(run.result.steps) + ',' +
               (run.result.converged ? "true" : "false") + ',' +
               g17(norm(run.result.estimate)) + '\n';
    }
    write_text_file((dir / "multistart.csv").string(), csv);
    out.artifacts.push_back("multistart.csv");

    std::string pair_csv = "start_id_a,start_id_b,quotient_distance\n";
    for (std::size_t a = 0; a < runs.size(); ++a)
        for (std::size_t b = a + 1; b < runs.size(); ++b)
            pair_csv += std::to_string(runs[a].start_index) + ',' +
                        std::to_string(runs[b].start_index) + ',' +
                        g17(quotient_distance(runs[a].result.estimate,
                                              runs[b].result.estimate)) +
                        '\n';
    write_text_file((dir / "multistart_pairwise.csv").string(), pair_csv);
    out.artifacts.push_back("multistart_pairwise.csv");

    if (cfg.emit_plots) {
        svg::PlotOptions opts;
        opts.title = "final variances over starts";
        opts.x_label = "F_I";
        opts.y_label = "count";
        write_text_file((dir / "multistart_hist.svg").string(),
                        svg::histogram(final_variances, std::min<std::size_t>(10, runs.size()),
                                       opts));
        out.artifacts.push_back("multistart_hist.svg");
    }
    return out;
}

CommandResult cmd_dataset_generate(const ExperimentConfig& cfg, const std::string& out_dir) {
    const fs::path dir = prepare_out_dir(out_dir);
    const Dataset ds =
        Dataset::sample(cfg.resolved_spec(), cfg.sigma, cfg.samples, cfg.seed, cfg.keep_hidden);
    save_dataset(ds, (dir / "dataset.csv").string(), (dir / "dataset.json").string());
    CommandResult out;
    out.artifacts = {"dataset.csv", "dataset.json"};
    return out;
}

std::string dataset_inspect_json(const std::string& csv_path, const std::string& json_path) {
    const Dataset ds = load_dataset(csv_path, json_path);
    json j;
    j["schema_version"] = kSchemaVersion;
    j["n"] = ds.dim();
    j["count"] = ds.size();
    j["sigma"] = ds.sigma();
    j["seed"] = ds.seed();
    j["has_phi"] = ds.has_hidden_transforms();
    j["template_norm"] = norm(ds.template_signal());
    j["moments"] = to_json(empirical_moments(ds));
    return j.dump(2) + "\n";
}

}  // namespace qte
