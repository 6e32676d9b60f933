#include "qte/bias.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qte/rng.hpp"

namespace qte {

namespace {

// Sub-seed tags for the independent random streams of the estimators.
constexpr std::uint64_t kTagOptimizerBatch = 101;
constexpr std::uint64_t kTagSelectionBatch = 102;
constexpr std::uint64_t kTagHeldoutBatch = 103;
constexpr std::uint64_t kTagRandomStarts = 104;

// The ascent iterates on a moderate fixed batch; final values and standard
// errors always come from full n_mc batches.
constexpr std::size_t kOptimizerBatch = 8192;
constexpr std::size_t kPgaIterations = 200;
constexpr double kPgaStep = 0.1;

void normalize(Signal& v) {
    const double nv = norm(v);
    if (nv > 0.0)
        for (double& x : v) x /= nv;
}

/// Fixed batch of generative-model draws with cached spectra: the common
/// random numbers shared by every direction evaluation during the ascent.
class CrnBatch {
public:
    CrnBatch(std::span<const double> t0, double sigma, std::size_t count, std::uint64_t seed)
        : n_(t0.size()), count_(count), use_fft_(Radix2Fft::admissible(t0.size())) {
        if (use_fft_) fft_.emplace_back(n_);
        draws_.resize(count * n_);
        if (use_fft_) spectra_.resize(count * n_);
        parallel::for_blocks(count, parallel::kDefaultBlock,
                             [&](std::size_t, std::size_t begin, std::size_t end) {
            std::vector<double> eps(n_);
            std::vector<std::complex<double>> spec;
            for (std::size_t b = begin; b < end; ++b) {
                Rng rng = Rng::stream(seed, b);
                std::span<double> y{draws_.data() + b * n_, n_};
                sample_observation(rng, t0, sigma, eps, y);
                if (use_fft_) {
                    fft_.front().spectrum_into(y, spec);
                    std::copy(spec.begin(), spec.end(),
                              spectra_.begin() + static_cast<std::ptrdiff_t>(b * n_));
                }
            }
        });
    }

    std::size_t dim() const { return n_; }

    /// Subgradient of v -> (1/B) sum_b max_k <v, g_k.Y_b>: the mean of the
    /// per-draw argmax-registered draws. Blockwise fixed-order reduction.
    Signal subgradient(std::span<const double> v) const {
        std::vector<std::complex<double>> v_spec;
        if (use_fft_) v_spec = fft_.front().spectrum(v);
        const std::size_t block = parallel::kDefaultBlock;
        const std::size_t n_blocks = (count_ + block - 1) / block;
        std::vector<double> partials(n_blocks * n_, 0.0);
        parallel::for_blocks(count_, block,
                             [&](std::size_t blk, std::size_t begin, std::size_t end) {
            std::vector<double> c(n_);
            std::vector<std::complex<double>> scratch(n_);
            double* acc = partials.data() + blk * n_;
            for (std::size_t b = begin; b < end; ++b) {
                const std::size_t k = argmax_shift(v, v_spec, b, c, scratch);
                const double* y = draws_.data() + b * n_;
                for (std::size_t j = 0; j < n_; ++j) acc[j] += y[(j + k) % n_];
            }
        });
        Signal grad(n_, 0.0);
        for (std::size_t blk = 0; blk < n_blocks; ++blk) {
            const double* acc = partials.data() + blk * n_;
            for (std::size_t j = 0; j < n_; ++j) grad[j] += acc[j];
        }
        const double inv = 1.0 / static_cast<double>(count_);
        for (double& g : grad) g *= inv;
        return grad;
    }

private:
    std::size_t argmax_shift(std::span<const double> v,
                             const std::vector<std::complex<double>>& v_spec, std::size_t b,
                             std::vector<double>& c,
                             std::vector<std::complex<double>>& scratch) const {
        if (use_fft_) {
            std::span<const std::complex<double>> y_spec{spectra_.data() + b * n_, n_};
            circular_cross_correlation(fft_.front(), v_spec, y_spec, scratch, c);
        } else {
            circular_cross_correlation_direct(v, {draws_.data() + b * n_, n_}, c);
        }
        std::size_t best = 0;
        for (std::size_t k = 1; k < n_; ++k)
            if (c[k] > c[best]) best = k;
        return best;
    }

    std::size_t n_;
    std::size_t count_;
    bool use_fft_;
    std::vector<Radix2Fft> fft_;
    std::vector<double> draws_;
    std::vector<std::complex<double>> spectra_;
};

/// Streams n_mc fresh draws and evaluates max_g <v, g.Y> for every direction
/// in one pass. Returns one mean/standard-error pair per direction.
std::vector<MeanAndError> eval_directions(std::span<const double> t0, double sigma,
                                          std::size_t n_mc, std::uint64_t seed,
                                          const std::vector<Signal>& dirs) {
    const std::size_t n = t0.size();
    const bool use_fft = Radix2Fft::admissible(n);
    std::vector<Radix2Fft> fft;
    if (use_fft) fft.emplace_back(n);
    std::vector<std::vector<std::complex<double>>> dir_specs;
    if (use_fft) {
        dir_specs.reserve(dirs.size());
        for (const auto& v : dirs) dir_specs.push_back(fft.front().spectrum(v));
    }
    std::vector<std::vector<double>> values(dirs.size(), std::vector<double>(n_mc));
    parallel::for_blocks(n_mc, parallel::kDefaultBlock,
                         [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> eps(n), y(n), c(n);
        std::vector<std::complex<double>> scratch(n), y_spec(n);
        for (std::size_t b = begin; b < end; ++b) {
            Rng rng = Rng::stream(seed, b);
            sample_observation(rng, t0, sigma, eps, y);
            if (use_fft) fft.front().spectrum_into(y, y_spec);
            for (std::size_t d = 0; d < dirs.size(); ++d) {
                if (use_fft) {
                    circular_cross_correlation(fft.front(), dir_specs[d], y_spec, scratch, c);
                } else {
                    circular_cross_correlation_direct(dirs[d], y, c);
                }
                double best = c[0];
                for (std::size_t k = 1; k < n; ++k) best = std::max(best, c[k]);
                values[d][b] = best;
            }
        }
    });
    std::vector<MeanAndError> out(dirs.size());
    for (std::size_t d = 0; d < dirs.size(); ++d) out[d] = mean_and_std_error(values[d]);
    return out;
}

/// Projected gradient ascent on the unit sphere with step 0.1/sqrt(iter).
Signal pga_maximize(const CrnBatch& batch, Signal v) {
    normalize(v);
    for (std::size_t it = 0; it < kPgaIterations; ++it) {
        const Signal grad = batch.subgradient(v);
        const double step = kPgaStep / std::sqrt(static_cast<double>(it + 1));
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += step * grad[j];
        const double nv = norm(v);
        if (nv == 0.0) break;  // degenerate; keep the un-normalizable point out
        for (double& x : v) x /= nv;
    }
    return v;
}

/// Deterministic start directions: one coordinate spike and the first few
/// cosine profiles; non-constant, so each one sees the noise.
std::vector<Signal> deterministic_starts(std::size_t n) {
    std::vector<Signal> starts;
    Signal spike(n, 0.0);
    spike[0] = 1.0;
    starts.push_back(spike);
    const std::size_t max_freq = std::min<std::size_t>(4, n / 2);
    for (std::size_t f = 1; f <= max_freq; ++f) {
        Signal cosv(n);
        for (std::size_t j = 0; j < n; ++j)
            cosv[j] = std::cos(2.0 * std::numbers::pi * static_cast<double>(f) *
                               static_cast<double>(j) / static_cast<double>(n));
        normalize(cosv);
        starts.push_back(std::move(cosv));
    }
    return starts;
}

struct SphereMaxOutcome {
    double value = 0.0;
    double heldout_value = 0.0;
    double heldout_std_error = 0.0;
    Signal direction;
    std::vector<double> start_values;
};

SphereMaxOutcome maximize_h_over_sphere(const Signal& t0, double sigma, std::size_t n_mc,
                                        std::size_t n_starts, std::uint64_t seed) {
    require(t0.size() >= 2, "dimension must be >= 2");
    require(n_mc >= 1, "n_mc must be >= 1");
    const std::size_t n = t0.size();

    std::vector<Signal> starts = deterministic_starts(n);
    if (norm(t0) > 0.0) {
        Signal vt = t0;
        normalize(vt);
        starts.push_back(std::move(vt));
    }
    const std::uint64_t start_seed = derive_seed(seed, kTagRandomStarts);
    for (std::size_t s = 0; s < n_starts; ++s) {
        Rng rng = Rng::stream(start_seed, s);
        Signal v(n);
        for (double& x : v) x = rng.normal();
        normalize(v);
        starts.push_back(std::move(v));
    }

    const CrnBatch batch(t0, sigma, std::min(n_mc, kOptimizerBatch),
                         derive_seed(seed, kTagOptimizerBatch));
    std::vector<Signal> finals;
    finals.reserve(starts.size());
    for (const auto& v0 : starts) finals.push_back(pga_maximize(batch, v0));
    // The raw starts stay in the pool: the selection below is then a max
    // over a superset whenever starts or candidates are added.
    finals.insert(finals.end(), starts.begin(), starts.end());

    const auto selection =
        eval_directions(t0, sigma, n_mc, derive_seed(seed, kTagSelectionBatch), finals);
    std::size_t best = 0;
    for (std::size_t d = 1; d < finals.size(); ++d)
        if (selection[d].mean > selection[best].mean) best = d;

    const auto heldout = eval_directions(t0, sigma, n_mc, derive_seed(seed, kTagHeldoutBatch),
                                         {finals[best]});

    SphereMaxOutcome out;
    out.value = selection[best].mean;
    out.heldout_value = heldout[0].mean;
    out.heldout_std_error = heldout[0].std_error;
    out.direction = finals[best];
    out.start_values.reserve(finals.size());
    for (const auto& me : selection) out.start_values.push_back(me.mean);
    return out;
}

}  // namespace

HEstimate estimate_h(std::span<const double> v, const Signal& t0, double sigma,
                     std::size_t n_mc, std::uint64_t seed) {
    require_signal(v);
    require_same_length(v, t0);
    require(sigma >= 0.0, "sigma must be nonnegative");
    require(n_mc >= 1, "n_mc must be >= 1");
    if (std::abs(norm(v) - 1.0) > 1e-9)
        throw InvalidArgument("direction must have unit norm");
    const auto res = eval_directions(t0, sigma, n_mc, seed, {Signal(v.begin(), v.end())});
    return HEstimate{res[0].mean, res[0].std_error};
}

KEstimate estimate_K(std::size_t n, const NoiseSpec& noise, std::size_t n_mc,
                     std::size_t n_starts, std::uint64_t seed) {
    require(noise.kind == NoiseSpec::Kind::gaussian_isotropic, "unsupported noise law");
    require(n >= 2, "dimension must be >= 2");
    require(n_mc >= 1000, "estimate_K needs n_mc >= 1000");
    const Signal zero(n, 0.0);
    const auto out = maximize_h_over_sphere(zero, 1.0, n_mc, n_starts, seed);
    KEstimate k;
    k.value = out.value;
    k.std_error = out.heldout_std_error;
    k.argmax_direction = out.direction;
    k.n_mc = n_mc;
    k.heldout_value = out.heldout_value;
    k.start_values = out.start_values;
    return k;
}

FrechetNormEstimate estimate_frechet_norm(const Signal& t0, double sigma, std::size_t n_mc,
                                          std::size_t n_starts, std::uint64_t seed) {
    require_signal(t0);
    require(sigma >= 0.0, "sigma must be nonnegative");
    require(n_mc >= 1000, "estimate_frechet_norm needs n_mc >= 1000");
    const auto out = maximize_h_over_sphere(t0, sigma, n_mc, n_starts, seed);
    FrechetNormEstimate est;
    est.value = std::max(0.0, out.value);  // sup_v h(v)^+
    est.std_error = out.heldout_std_error;
    est.direction = out.direction;
    return est;
}

BiasReport bias_report(const Signal& t0, double sigma, const Signal& m_hat, const KEstimate& K,
                       const std::optional<FrechetNormEstimate>& frechet_norm) {
    require_signal(t0);
    require_same_length(t0, m_hat);
    require(sigma >= 0.0, "sigma must be nonnegative");
    require(K.argmax_direction.empty() || K.argmax_direction.size() == t0.size(),
            "K estimate dimension mismatch");

    BiasReport r;
    r.sigma = sigma;
    r.template_norm = norm(t0);
    r.K = K;
    r.EB = quotient_distance(t0, m_hat);
    r.EB_over_sigma = sigma > 0.0 ? r.EB / sigma : 0.0;
    r.estimate_norm = norm(m_hat);
    r.lower_bound = sigma * K.value - 2.0 * r.template_norm;
    r.upper_bound = sigma * K.value + 2.0 * r.template_norm;
    r.slack = 3.0 * sigma * K.std_error + 0.05 * sigma;
    r.bounds_satisfied =
        r.EB >= r.lower_bound - r.slack && r.EB <= r.upper_bound + r.slack;
    r.useless_regime = sigma > 0.0 && r.template_norm / sigma < K.value / 3.0;

    r.frechet_norm = frechet_norm;
    r.norm_lower_bound = sigma * K.value - r.template_norm;
    r.norm_upper_bound = sigma * K.value + r.template_norm;
    const double fn_se = frechet_norm ? frechet_norm->std_error : 0.0;
    r.norm_slack = 3.0 * std::sqrt(sigma * K.std_error * sigma * K.std_error + fn_se * fn_se) +
                   0.05 * sigma;
    r.norm_bounds_satisfied = r.estimate_norm >= r.norm_lower_bound - r.norm_slack &&
                              r.estimate_norm <= r.norm_upper_bound + r.norm_slack;
    return r;
}

Signal oracle_mean_known_transforms(const Dataset& ds) {
    if (!ds.has_hidden_transforms())
        throw MissingHiddenError("oracle mean needs the hidden transforms");
    const std::size_t n = ds.dim();
    const std::size_t count = ds.size();
    const std::size_t block = parallel::kDefaultBlock;
    const std::size_t n_blocks = (count + block - 1) / block;
    std::vector<double> partials(n_blocks * n, 0.0);
    parallel::for_blocks(count, block, [&](std::size_t b, std::size_t begin, std::size_t end) {
        double* acc = partials.data() + b * n;
        for (std::size_t i = begin; i < end; ++i) {
            const auto y = ds.observation(i);
            const std::size_t k = inverse(ds.phi(i)).k;
            for (std::size_t j = 0; j < n; ++j) acc[j] += y[(j + k) % n];
        }
    });
    Signal mean(n, 0.0);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const double* acc = partials.data() + b * n;
        for (std::size_t j = 0; j < n; ++j) mean[j] += acc[j];
    }
    const double inv = 1.0 / static_cast<double>(count);
    for (double& x : mean) x *= inv;
    return mean;
}

}  // namespace qte
