#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qte/common.hpp"
#include "qte/group.hpp"

namespace qte {

/// Description of a template signal. `step` is `height` on
/// [start, start+length) and 0 elsewhere; `smooth` is a sum of sampled
/// cosines sum_c amplitude[c] * cos(2*pi*frequency[c]*j/N); `custom` is an
/// explicit value list.
struct TemplateSpec {
    enum class Kind { step, smooth, custom };

    Kind kind = Kind::step;
    std::size_t n = 64;

    // step parameters
    std::size_t start = 16;
    std::size_t length = 16;
    double height = 1.0;

    // smooth parameters
    std::vector<double> frequencies = {1.0};
    std::vector<double> amplitudes = {1.0};

    // custom parameters
    Signal values;

    /// Constant templates are fixed points of the shift action and are
    /// rejected unless explicitly allowed.
    bool allow_fixed_point = false;

    static TemplateSpec step_default();
    static TemplateSpec smooth_default();
    static TemplateSpec custom(Signal values);
};

Signal make_template(const TemplateSpec& spec);

class Rng;

/// Draws one observation of Y = phi.t0 + sigma*eps into `y`: phi uniform
/// over the N shifts (drawn first), then N noise coordinates of standard
/// deviation 1/sqrt(N). `eps` receives the standardized noise; returns phi.
/// Every sampler in the library goes through this function, so the draw
/// order per stream is fixed.
std::size_t sample_observation(Rng& rng, std::span<const double> t0, double sigma,
                               std::span<double> eps, std::span<double> y);

/// Sample of the generative model Y = phi.t0 + sigma*eps, with phi uniform
/// over the N shifts and eps i.i.d. Gaussian per coordinate with variance
/// 1/N, so that E||eps||^2 = 1 and the per-coordinate noise level is
/// sigma/sqrt(N). Hidden fields (phi, eps) are retained only when requested.
class Dataset {
public:
    static Dataset sample(const Signal& t0, double sigma, std::size_t count,
                          std::uint64_t seed, bool keep_hidden);
    static Dataset sample(const TemplateSpec& spec, double sigma, std::size_t count,
                          std::uint64_t seed, bool keep_hidden);

    /// Builds a dataset from explicit observations (test and file-loading
    /// support). Hidden transforms may be supplied; hidden noises may not.
    static Dataset from_observations(Signal t0, double sigma, std::uint64_t seed,
                                     std::vector<Signal> observations,
                                     std::optional<std::vector<std::size_t>> phis = {});

    /// Reassembles a dataset from serialized parts (row-major data).
    static Dataset from_parts(Signal t0, std::optional<TemplateSpec> spec, double sigma,
                              std::uint64_t seed, std::size_t n, std::vector<double> data,
                              std::optional<std::vector<std::size_t>> phis);

    std::size_t size() const { return count_; }
    std::size_t dim() const { return n_; }
    double sigma() const { return sigma_; }
    std::uint64_t seed() const { return seed_; }
    bool has_hidden_transforms() const { return !phis_.empty(); }
    bool has_hidden_noise() const { return !eps_.empty(); }

    const Signal& template_signal() const { return template_; }
    const std::optional<TemplateSpec>& template_spec() const { return spec_; }

    std::span<const double> observation(std::size_t i) const {
        return {data_.data() + i * n_, n_};
    }
    Shift phi(std::size_t i) const;
    std::span<const double> eps(std::size_t i) const;

    /// Restriction to the first `count` observations (shares nothing; copies).
    Dataset prefix(std::size_t count) const;

private:
    Dataset() = default;

    std::size_t n_ = 0;
    std::size_t count_ = 0;
    double sigma_ = 0.0;
    std::uint64_t seed_ = 0;
    Signal template_;
    std::optional<TemplateSpec> spec_;
    std::vector<double> data_;          // row-major count_ x n_
    std::vector<std::size_t> phis_;     // empty when hidden
    std::vector<double> eps_;           // row-major, empty when hidden
};

/// Sanity diagnostics: mean ||Y||^2 and, when hidden fields are retained,
/// mean ||eps||^2 and the empirical distribution of phi.
struct Moments {
    double mean_sq_norm = 0.0;
    double mean_sq_norm_std_error = 0.0;
    std::optional<double> mean_eps_sq_norm;
    std::vector<std::size_t> phi_histogram;  // empty when hidden transforms absent
};

Moments empirical_moments(const Dataset& ds);

}  // namespace qte
