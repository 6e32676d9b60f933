#pragma once

#include <cstddef>
#include <span>

#include "qte/common.hpp"

namespace qte {

/// Element of the cyclic group Z/NZ acting on R^N by index rotation:
/// (g.x)[j] = x[(j + k) mod N]. The action is isometric.
struct Shift {
    std::size_t k = 0;
    std::size_t n = 0;
};

inline bool operator==(const Shift& a, const Shift& b) { return a.k == b.k && a.n == b.n; }

Shift shift_identity(std::size_t n);
Shift compose(const Shift& g, const Shift& h);
Shift inverse(const Shift& g);

/// The action of g on x: out[j] = x[(j + g.k) mod N].
Signal act(const Shift& g, std::span<const double> x);
inline Signal act(const Shift& g, const Signal& x) {
    return act(g, std::span<const double>{x});
}

/// Result of aligning y to x over all shifts. `margin` is the gap between
/// the best and second-best squared distances; ties resolve to the smallest
/// shift index, so repeated registration of identical inputs is identical.
struct Registration {
    Shift element;
    double distance = 0.0;
    double margin = 0.0;
    bool unique = false;
    bool fft_fallback = false;  // set when the FFT path had to run exhaustively
};

/// Scale-relative tolerance separating "unique" from "tied" registrations.
double uniqueness_tolerance(std::span<const double> x, std::span<const double> y);

/// argmin over all N shifts of ||x - g.y||^2, by direct evaluation.
Registration register_exhaustive(std::span<const double> x, std::span<const double> y);

/// Same result through the circular cross-correlation computed by FFT.
/// Lengths that are not a power of two fall back to the exhaustive search
/// and set `fft_fallback`.
Registration register_fft(std::span<const double> x, std::span<const double> y);

/// True iff, with z the registration of y with respect to m, the inner
/// product <m, z - g.z> stays away from zero (|.| > tol) for every g != e.
bool is_unique_registration(std::span<const double> m, std::span<const double> y, double tol);
bool is_unique_registration(std::span<const double> m, std::span<const double> y);

/// True iff ||g.x - x|| <= tol for every g; for the cyclic action this means
/// x is constant up to tol.
bool is_fixed_point(std::span<const double> x, double tol);

}  // namespace qte
