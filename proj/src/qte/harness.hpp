#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qte/bias.hpp"
#include "qte/maxmax.hpp"
#include "qte/model.hpp"

namespace qte {

/// Resolved experiment configuration. A config file plus the binary version
/// pins a bitwise-reproducible run: identical configs yield byte-identical
/// CSV/JSON artifacts. Keys of the key-value config file:
///
///   template             step | smooth | file
///   template.start       step support start            (default 16)
///   template.length      step support length           (default 16)
///   template.height      step height                   (default 1)
///   template.frequencies comma list for smooth         (default 1)
///   template.amplitudes  comma list for smooth         (default 1)
///   template.file        CSV with explicit values
///   n                    dimension                     (default 64)
///   sigma                noise level                   (default 10)
///   samples              observation count I           (default 100000)
///   seed                 RNG seed                      (default 1)
///   keep_hidden          retain phi/eps                (default true)
///   maxmax.max_steps     iteration cap                 (default 10000)
///   multistart.starts    starts incl. the default one  (default 20)
///   k.samples            Monte Carlo draws for K/h     (default 100000)
///   k.starts             random sphere starts          (default 20)
///   karcher.perturbations                              (default 100)
///   sweep.sigmas         comma list for k-sweep        (default 5,10,20,40)
///   plots                emit SVG figures              (default true)
struct ExperimentConfig {
    TemplateSpec template_spec = TemplateSpec::step_default();
    std::string template_file;  // when set, values are loaded from this CSV
    // Step support defaults to N/4..N/2 (start = length = N/4) unless set.
    std::optional<std::size_t> step_start;
    std::optional<std::size_t> step_length;
    double sigma = 10.0;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    bool keep_hidden = true;
    std::size_t max_steps = 10000;
    std::size_t multistart_starts = 20;
    std::size_t k_n_mc = 100000;
    std::size_t k_starts = 20;
    std::size_t karcher_perturbations = 100;
    std::vector<double> sweep_sigmas = {5.0, 10.0, 20.0, 40.0};
    bool emit_plots = true;

    /// Applies one `key = value` assignment; throws ConfigError on unknown
    /// keys or unparsable values.
    void set(const std::string& key, const std::string& value);

    /// Parses a key-value file (one assignment per line, '#' comments).
    void load_file(const std::string& path);

    /// The spec with n-relative defaults filled in (and template.file loaded
    /// for kind = custom).
    TemplateSpec resolved_spec() const;

    /// Materializes the template (resolving template.file if set).
    Signal resolve_template() const;

    std::string describe() const;  // canonical key=value dump for artifacts
};

struct CommandResult {
    bool converged = true;
    std::vector<std::string> artifacts;  // paths written, relative to out_dir
};

/// Samples a dataset, runs the alternating estimator, certifies the result,
/// estimates K, and writes report.json, maxmax_trace.csv, and overlay.svg.
CommandResult cmd_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

/// F_I at the template and at the estimate versus sample size, at
/// logarithmic checkpoints: variance_curve.csv / variance_curve.svg.
CommandResult cmd_variance_curve(const ExperimentConfig& cfg, const std::string& out_dir);

/// One estimation run per sigma with the Theorem-style band around EB:
/// k_sweep.csv / k_sweep.svg.
CommandResult cmd_k_sweep(const ExperimentConfig& cfg, const std::string& out_dir);

/// Runs from many starts; emits multistart.csv, multistart_pairwise.csv and
/// a histogram of final variances.
CommandResult cmd_multistart(const ExperimentConfig& cfg, const std::string& out_dir);

/// Samples and serializes a dataset (dataset.csv / dataset.json).
CommandResult cmd_dataset_generate(const ExperimentConfig& cfg, const std::string& out_dir);

/// Loads a serialized dataset and returns a JSON summary (header + moments).
std::string dataset_inspect_json(const std::string& csv_path, const std::string& json_path);

}  // namespace qte
