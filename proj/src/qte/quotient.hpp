#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qte/fft.hpp"
#include "qte/group.hpp"
#include "qte/model.hpp"

namespace qte {

/// Quotient pseudometric: min over g of ||x - g.y||. Symmetric up to
/// floating point; zero on a whole orbit.
double quotient_distance(std::span<const double> x, std::span<const double> y);

struct VarianceEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

/// Registers every observation of a dataset against reference signals.
/// Observation spectra are precomputed once, so one pass costs one FFT for
/// the reference plus one inverse FFT per observation. Lengths without an
/// FFT plan use the direct correlation. Per-observation work parallelizes
/// over fixed-size blocks; reductions are fixed-order, so results do not
/// depend on the worker count.
class DatasetRegistrar {
public:
    explicit DatasetRegistrar(const Dataset& ds);

    struct Pass {
        std::vector<std::size_t> shifts;   // argmin shift per observation
        std::vector<double> sq_dist;       // squared distance at the argmin
        std::vector<double> margins;       // second-best minus best squared distance
        double variance = 0.0;             // pairwise mean of sq_dist
    };

    Pass register_all(std::span<const double> m) const;

    /// Mean of the registered observations (1/I) sum_i g_i . Y_i for the
    /// given per-observation shifts, accumulated blockwise in index order.
    Signal mean_registered(std::span<const std::size_t> shifts) const;

    double variance_at(std::span<const double> m) const { return register_all(m).variance; }

    const Dataset& dataset() const { return *ds_; }

private:
    const Dataset* ds_;
    std::size_t n_ = 0;
    bool use_fft_ = false;
    std::vector<Radix2Fft> fft_;  // 0 or 1 plan
    std::vector<std::complex<double>> spectra_;  // row-major count x n when use_fft_
    std::vector<double> obs_sq_norm_;
};

/// F_I(x): mean squared quotient distance from x to the observations, with
/// the standard error of that mean.
VarianceEstimate empirical_variance(std::span<const double> x, const Dataset& ds);
VarianceEstimate empirical_variance(std::span<const double> x, const DatasetRegistrar& reg);

struct VarianceCurveRow {
    std::size_t checkpoint = 0;
    std::string label;
    double value = 0.0;
    double std_error = 0.0;
};

/// F_{I'}(x) for each labelled point and each checkpoint I', reusing one
/// registration pass per point. Checkpoints must be increasing and at most
/// the dataset size; evaluation follows dataset order.
std::vector<VarianceCurveRow> variance_curve(
    const std::vector<std::pair<std::string, Signal>>& points, const Dataset& ds,
    const std::vector<std::size_t>& checkpoints);

/// Logarithmic checkpoints, `per_decade` points per decade from 10 up to
/// `total`, deduplicated, always ending at `total`.
std::vector<std::size_t> log_checkpoints(std::size_t total, std::size_t per_decade = 10);

}  // namespace qte
