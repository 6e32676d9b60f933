#include "qte/quotient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qte {

double quotient_distance(std::span<const double> x, std::span<const double> y) {
    return register_fft(x, y).distance;
}

DatasetRegistrar::DatasetRegistrar(const Dataset& ds) : ds_(&ds), n_(ds.dim()) {
    use_fft_ = Radix2Fft::admissible(n_);
    obs_sq_norm_.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i)
        obs_sq_norm_[i] = squared_norm(ds.observation(i));
    if (!use_fft_) return;
    fft_.emplace_back(n_);
    spectra_.resize(ds.size() * n_);
    const Radix2Fft& fft = fft_.front();
    parallel::for_blocks(ds.size(), parallel::kDefaultBlock,
                         [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<std::complex<double>> spec;
        for (std::size_t i = begin; i < end; ++i) {
            fft.spectrum_into(ds.observation(i), spec);
            std::copy(spec.begin(), spec.end(),
                      spectra_.begin() + static_cast<std::ptrdiff_t>(i * n_));
        }
    });
}

DatasetRegistrar::Pass DatasetRegistrar::register_all(std::span<const double> m) const {
    require_same_length(m, ds_->observation(0));
    const std::size_t count = ds_->size();
    const std::size_t n = n_;
    Pass pass;
    pass.shifts.resize(count);
    pass.sq_dist.resize(count);
    pass.margins.resize(count);

    const double m_sq = squared_norm(m);
    std::vector<std::complex<double>> m_spec;
    if (use_fft_) m_spec = fft_.front().spectrum(m);

    parallel::for_blocks(count, parallel::kDefaultBlock,
                         [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> c(n);
        std::vector<std::complex<double>> scratch(n);
        for (std::size_t i = begin; i < end; ++i) {
            if (use_fft_) {
                std::span<const std::complex<double>> y_spec{spectra_.data() + i * n, n};
                circular_cross_correlation(fft_.front(), m_spec, y_spec, scratch, c);
                // Smallest squared distance = largest correlation; ties go to
                // the smallest shift, matching the exhaustive search.
                std::size_t best = 0;
                for (std::size_t k = 1; k < n; ++k)
                    if (c[k] > c[best]) best = k;
                double second = -std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < n; ++k)
                    if (k != best) second = std::max(second, c[k]);
                pass.shifts[i] = best;
                pass.sq_dist[i] = std::max(0.0, m_sq + obs_sq_norm_[i] - 2.0 * c[best]);
                pass.margins[i] = std::max(0.0, 2.0 * (c[best] - second));
            } else {
                const auto y = ds_->observation(i);
                std::size_t best = 0;
                double best_sq = std::numeric_limits<double>::infinity();
                double second_sq = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        const double d = m[j] - y[(j + k) % n];
                        s += d * d;
                    }
                    if (s < best_sq) {
                        second_sq = best_sq;
                        best_sq = s;
                        best = k;
                    } else if (s < second_sq) {
                        second_sq = s;
                    }
                }
                pass.shifts[i] = best;
                pass.sq_dist[i] = best_sq;
                pass.margins[i] = std::max(0.0, second_sq - best_sq);
            }
        }
    });

    pass.variance = pairwise_mean(pass.sq_dist);
    return pass;
}

Signal DatasetRegistrar::mean_registered(std::span<const std::size_t> shifts) const {
    require(shifts.size() == ds_->size(), "one shift per observation required");
    const std::size_t count = ds_->size();
    const std::size_t n = n_;
    const std::size_t block = parallel::kDefaultBlock;
    const std::size_t n_blocks = (count + block - 1) / block;
    std::vector<double> partials(n_blocks * n, 0.0);
    parallel::for_blocks(count, block,
                         [&](std::size_t b, std::size_t begin, std::size_t end) {
        double* acc = partials.data() + b * n;
        for (std::size_t i = begin; i < end; ++i) {
            const auto y = ds_->observation(i);
            const std::size_t k = shifts[i];
            for (std::size_t j = 0; j < n; ++j) acc[j] += y[(j + k) % n];
        }
    });
    Signal mean(n, 0.0);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const double* acc = partials.data() + b * n;
        for (std::size_t j = 0; j < n; ++j) mean[j] += acc[j];
    }
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t j = 0; j < n; ++j) mean[j] *= inv;
    return mean;
}

VarianceEstimate empirical_variance(std::span<const double> x, const DatasetRegistrar& reg) {
    const auto pass = reg.register_all(x);
    const MeanAndError me = mean_and_std_error(pass.sq_dist);
    return VarianceEstimate{me.mean, me.std_error, pass.sq_dist.size()};
}

VarianceEstimate empirical_variance(std::span<const double> x, const Dataset& ds) {
    require(ds.size() >= 1, "dataset must be non-empty");
    return empirical_variance(x, DatasetRegistrar(ds));
}

std::vector<VarianceCurveRow> variance_curve(
    const std::vector<std::pair<std::string, Signal>>& points, const Dataset& ds,
    const std::vector<std::size_t>& checkpoints) {
    require(!checkpoints.empty(), "at least one checkpoint required");
    for (std::size_t i = 0; i + 1 < checkpoints.size(); ++i)
        require(checkpoints[i] < checkpoints[i + 1], "checkpoints must be increasing");
    require(checkpoints.back() <= ds.size(), "checkpoint exceeds dataset size");
    require(checkpoints.front() >= 1, "checkpoints must be >= 1");

    const DatasetRegistrar reg(ds);
    std::vector<VarianceCurveRow> rows;
    rows.reserve(points.size() * checkpoints.size());
    for (const auto& [label, x] : points) {
        const auto pass = reg.register_all(x);
        for (const std::size_t cp : checkpoints) {
            std::span<const double> head{pass.sq_dist.data(), cp};
            const MeanAndError me = mean_and_std_error(head);
            rows.push_back(VarianceCurveRow{cp, label, me.mean, me.std_error});
        }
    }
    return rows;
}

std::vector<std::size_t> log_checkpoints(std::size_t total, std::size_t per_decade) {
    require(total >= 1, "total must be >= 1");
    require(per_decade >= 1, "per_decade must be >= 1");
    std::vector<std::size_t> cps;
    if (total <= 10) {
        for (std::size_t i = 1; i <= total; ++i) cps.push_back(i);
        return cps;
    }
    for (std::size_t e = per_decade;; ++e) {
        const double v = std::pow(10.0, static_cast<double>(e) / static_cast<double>(per_decade));
        const auto cp = static_cast<std::size_t>(std::llround(v));
        if (cp >= total) break;
        if (cps.empty() || cp > cps.back()) cps.push_back(cp);
    }
    cps.push_back(total);
    return cps;
}

}  // namespace qte
