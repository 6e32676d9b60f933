#pragma once

#include <cstdint>

namespace qte {

/// SplitMix64 generator. Substreams are keyed by (seed, stream id): the
/// initial state is mix(mix(seed) + mix(stream ^ GOLDEN)), so distinct
/// observations, Monte Carlo draws, and optimizer starts each consume an
/// independent stream regardless of evaluation order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed + kGolden)) {}

    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        Rng r(0);
        r.state_ = mix(mix(seed) + mix(stream_id ^ kGolden));
        r.cached_valid_ = false;
        return r;
    }

    std::uint64_t next_u64() {
        state_ += kGolden;
        return mix(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Multiply-shift; bias is O(n / 2^64).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal via Box-Muller; the second value of each pair is
    /// cached, so draws come in a fixed per-stream order.
    double normal();

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool cached_valid_ = false;
};

/// Derives an independent sub-seed for a named purpose (dataset sampling,
/// optimizer starts, held-out batches, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    Rng r = Rng::stream(seed, tag);
    return r.next_u64();
}

}  // namespace qte
