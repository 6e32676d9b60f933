#include "qte/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace qte {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

double parse_double(const std::string& text) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str()) throw IoError("cannot parse number: '" + text + "'");
    return v;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_signal_csv(std::span<const double> x, const std::string& path) {
    std::string out;
    for (double v : x) {
        out += g17(v);
        out += '\n';
    }
    write_text_file(path, out);
}

Signal load_signal_csv(const std::string& path) {
    const std::string text = read_text_file(path);
    Signal x;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            x.push_back(parse_double(token));
            token.clear();
        }
    };
    for (char ch : text) {
        if (ch == ',' || ch == '\n' || ch == '\r' || ch == ' ' || ch == '\t') {
            flush();
        } else {
            token.push_back(ch);
        }
    }
    flush();
    if (x.size() < 2) throw IoError("signal file must contain at least two values: " + path);
    return x;
}

nlohmann::json to_json(const TemplateSpec& spec) {
    json j;
    j["n"] = spec.n;
    switch (spec.kind) {
        case TemplateSpec::Kind::step:
            j["kind"] = "step";
            j["start"] = spec.start;
            j["length"] = spec.length;
            j["height"] = spec.height;
            break;
        case TemplateSpec::Kind::smooth:
            j["kind"] = "smooth";
            j["frequencies"] = spec.frequencies;
            j["amplitudes"] = spec.amplitudes;
            break;
        case TemplateSpec::Kind::custom:
            j["kind"] = "custom";
            j["values"] = spec.values;
            break;
    }
    if (spec.allow_fixed_point) j["allow_fixed_point"] = true;
    return j;
}

TemplateSpec template_spec_from_json(const nlohmann::json& j) {
    TemplateSpec spec;
    const std::string kind = j.at("kind").get<std::string>();
    spec.n = j.at("n").get<std::size_t>();
    if (kind == "step") {
        spec.kind = TemplateSpec::Kind::step;
        spec.start = j.at("start").get<std::size_t>();
        spec.length = j.at("length").get<std::size_t>();
        spec.height = j.at("height").get<double>();
    } else if (kind == "smooth") {
        spec.kind = TemplateSpec::Kind::smooth;
        spec.frequencies = j.at("frequencies").get<std::vector<double>>();
        spec.amplitudes = j.at("amplitudes").get<std::vector<double>>();
    } else if (kind == "custom") {
        spec.kind = TemplateSpec::Kind::custom;
        spec.values = j.at("values").get<Signal>();
    } else {
        throw IoError("unknown template kind: " + kind);
    }
    if (j.contains("allow_fixed_point")) spec.allow_fixed_point = j["allow_fixed_point"].get<bool>();
    return spec;
}

void save_dataset(const Dataset& ds, const std::string& csv_path, const std::string& json_path) {
    json header;
    header["schema_version"] = kSchemaVersion;
    header["n"] = ds.dim();
    header["count"] = ds.size();
    header["sigma"] = ds.sigma();
    header["seed"] = ds.seed();
    header["has_phi"] = ds.has_hidden_transforms();
    if (ds.template_spec()) {
        header["template_spec"] = to_json(*ds.template_spec());
    } else {
        TemplateSpec custom = TemplateSpec::custom(ds.template_signal());
        custom.allow_fixed_point = true;  // raw templates may be anything
        header["template_spec"] = to_json(custom);
    }
    write_text_file(json_path, header.dump(2) + "\n");

    std::string csv = "index";
    if (ds.has_hidden_transforms()) csv += ",phi";
    for (std::size_t j = 0; j < ds.dim(); ++j) csv += ",y" + std::to_string(j);
    csv += '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        csv += std::to_string(i);
        if (ds.has_hidden_transforms()) csv += ',' + std::to_string(ds.phi(i).k);
        const auto y = ds.observation(i);
        for (std::size_t j = 0; j < ds.dim(); ++j) csv += ',' + g17(y[j]);
        csv += '\n';
    }
    write_text_file(csv_path, csv);
}

Dataset load_dataset(const std::string& csv_path, const std::string& json_path) {
    json header;
    try {
        header = json::parse(read_text_file(json_path));
    } catch (const json::parse_error& e) {
        throw IoError("bad dataset header " + json_path + ": " + e.what());
    }
    const auto n = header.at("n").get<std::size_t>();
    const auto count = header.at("count").get<std::size_t>();
    const auto sigma = header.at("sigma").get<double>();
    const auto seed = header.at("seed").get<std::uint64_t>();
    const bool has_phi = header.at("has_phi").get<bool>();
    const TemplateSpec spec = template_spec_from_json(header.at("template_spec"));
    Signal t0 = spec.kind == TemplateSpec::Kind::custom ? spec.values : make_template(spec);

    std::istringstream in(read_text_file(csv_path));
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty dataset csv: " + csv_path);
    std::vector<double> data;
    data.reserve(count * n);
    std::optional<std::vector<std::size_t>> phis;
    if (has_phi) phis.emplace();
    const std::size_t expected_cols = 1 + (has_phi ? 1 : 0) + n;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != expected_cols)
            throw IoError("dataset row has " + std::to_string(cells.size()) +
                          " columns, expected " + std::to_string(expected_cols));
        std::size_t col = 1;
        if (has_phi) phis->push_back(static_cast<std::size_t>(std::stoul(cells[col++])));
        for (std::size_t j = 0; j < n; ++j) data.push_back(parse_double(cells[col++]));
    }
    if (data.size() != count * n)
        throw IoError("dataset csv holds " + std::to_string(data.size() / n) +
                      " observations, header says " + std::to_string(count));
    std::optional<TemplateSpec> spec_opt;
    if (spec.kind != TemplateSpec::Kind::custom || !spec.allow_fixed_point) spec_opt = spec;
    return Dataset::from_parts(std::move(t0), spec_opt, sigma, seed, n, std::move(data),
                               std::move(phis));
}

nlohmann::json to_json(const KarcherCertificate& cert) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["all_unique"] = cert.all_unique;
    double min_margin = std::numeric_limits<double>::infinity();
    std::size_t non_unique = 0;
    for (double m : cert.margins) {
        min_margin = std::min(min_margin, m);
        if (m <= 0.0) ++non_unique;
    }
    j["n_observations"] = cert.margins.size();
    j["min_margin"] = cert.margins.empty() ? 0.0 : min_margin;
    j["n_zero_margin"] = non_unique;
    j["variance_at_estimate"] = cert.variance_at_estimate;
    j["perturbation_checked"] = cert.perturbation_checked;
    j["perturbation_radius"] = cert.perturbation_radius;
    j["perturbations_tested"] = cert.perturbations_tested;
    j["perturbations_passed"] = cert.perturbations_passed;
    return j;
}

nlohmann::json to_json(const KEstimate& k) {
    json j;
    j["value"] = k.value;
    j["std_error"] = k.std_error;
    j["n_mc"] = k.n_mc;
    j["heldout_value"] = k.heldout_value;
    j["argmax_direction"] = k.argmax_direction;
    j["start_values"] = k.start_values;
    return j;
}

nlohmann::json to_json(const BiasReport& report) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["sigma"] = report.sigma;
    j["template_norm"] = report.template_norm;
    j["K"] = to_json(report.K);
    j["EB"] = report.EB;
    j["EB_over_sigma"] = report.EB_over_sigma;
    j["estimate_norm"] = report.estimate_norm;
    j["lower_bound"] = report.lower_bound;
    j["upper_bound"] = report.upper_bound;
    j["slack"] = report.slack;
    j["bounds_satisfied"] = report.bounds_satisfied;
    j["useless_regime"] = report.useless_regime;
    if (report.frechet_norm) {
        j["frechet_norm"] = {{"value", report.frechet_norm->value},
                             {"std_error", report.frechet_norm->std_error}};
    } else {
        j["frechet_norm"] = nullptr;
    }
    j["norm_lower_bound"] = report.norm_lower_bound;
    j["norm_upper_bound"] = report.norm_upper_bound;
    j["norm_slack"] = report.norm_slack;
    j["norm_bounds_satisfied"] = report.norm_bounds_satisfied;
    // The estimate is an empirical Karcher mean; EB is its finite-sample
    // proxy for the population bias.
    j["bias_proxy"] = "empirical";
    return j;
}

nlohmann::json to_json(const Moments& moments) {
    json j;
    j["mean_sq_norm"] = moments.mean_sq_norm;
    j["mean_sq_norm_std_error"] = moments.mean_sq_norm_std_error;
    if (moments.mean_eps_sq_norm) {
        j["mean_eps_sq_norm"] = *moments.mean_eps_sq_norm;
    } else {
        j["mean_eps_sq_norm"] = nullptr;
    }
    j["phi_histogram"] = moments.phi_histogram;
    return j;
}

}  // namespace qte
