#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qte {

/// A signal is a point of R^N, N >= 2. Entries must be finite.
using Signal = std::vector<double>;

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionMismatch : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingHiddenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidArgument(msg);
}

inline void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw DimensionMismatch("signal lengths differ: " + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()));
}

inline void require_signal(std::span<const double> x) {
    if (x.size() < 2) throw InvalidArgument("signal length must be >= 2");
    for (double v : x)
        if (!std::isfinite(v)) throw InvalidArgument("signal entries must be finite");
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double squared_norm(std::span<const double> x) { return dot(x, x); }

inline double norm(std::span<const double> x) { return std::sqrt(squared_norm(x)); }

/// Deterministic pairwise (cascade) summation. The reduction tree depends
/// only on the length, so the result is a pure function of the sequence.
double pairwise_sum(std::span<const double> values);

inline double pairwise_mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return pairwise_sum(values) / static_cast<double>(values.size());
}

/// Mean and standard error of the mean (sample std / sqrt(n)); n == 1 gives
/// std error 0.
struct MeanAndError {
    double mean = 0.0;
    double std_error = 0.0;
};
MeanAndError mean_and_std_error(std::span<const double> values);

namespace parallel {

/// Number of worker threads (QTE_THREADS overrides hardware_concurrency).
unsigned worker_count();

/// Runs fn(block_index, begin, end) over [0, count) split into fixed-size
/// blocks. Block boundaries depend only on count and block_size, never on the
/// number of workers, so per-block outputs are reproducible.
void for_blocks(std::size_t count, std::size_t block_size,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

constexpr std::size_t kDefaultBlock = 4096;

}  // namespace parallel

}  // namespace qte
