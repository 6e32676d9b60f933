#include "qte/group.hpp"

#include <algorithm>
#include <limits>

#include "qte/fft.hpp"

namespace qte {

namespace {

void require_same_group(const Shift& g, const Shift& h) {
    if (g.n != h.n)
        throw DimensionMismatch("shift moduli differ: " + std::to_string(g.n) + " vs " +
                                std::to_string(h.n));
}

void require_valid(const Shift& g) {
    require(g.n >= 2, "shift modulus must be >= 2");
    require(g.k < g.n, "shift index out of range");
}

/// Scans pre-computed per-shift squared distances for the smallest (ties to
/// the smallest index) and the runner-up.
Registration pick_best(std::span<const double> sq_dist, double scale_tol) {
    Registration reg;
    const std::size_t n = sq_dist.size();
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (sq_dist[k] < sq_dist[best]) best = k;
    double second = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k)
        if (k != best) second = std::min(second, sq_dist[k]);
    reg.element = Shift{best, n};
    reg.distance = std::sqrt(std::max(0.0, sq_dist[best]));
    reg.margin = std::max(0.0, second - sq_dist[best]);
    reg.unique = reg.margin > 2.0 * scale_tol;
    return reg;
}

}  // namespace

Shift shift_identity(std::size_t n) {
    require(n >= 2, "shift modulus must be >= 2");
    return Shift{0, n};
}

Shift compose(const Shift& g, const Shift& h) {
    require_valid(g);
    require_valid(h);
    require_same_group(g, h);
    return Shift{(g.k + h.k) % g.n, g.n};
}

Shift inverse(const Shift& g) {
    require_valid(g);
    return Shift{(g.n - g.k) % g.n, g.n};
}

Signal act(const Shift& g, std::span<const double> x) {
    require_valid(g);
    if (x.size() != g.n)
        throw DimensionMismatch("shift modulus " + std::to_string(g.n) +
                                " does not match signal length " + std::to_string(x.size()));
    Signal out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[(j + g.k) % g.n];
    return out;
}

double uniqueness_tolerance(std::span<const double> x, std::span<const double> y) {
    return 1e-9 * norm(x) * norm(y);
}

Registration register_exhaustive(std::span<const double> x, std::span<const double> y) {
    require_same_length(x, y);
    require(x.size() >= 2, "signal length must be >= 2");
    const std::size_t n = x.size();
    std::vector<double> sq(n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = x[j] - y[(j + k) % n];
            s += d * d;
        }
        sq[k] = s;
    }
    return pick_best(sq, uniqueness_tolerance(x, y));
}

Registration register_fft(std::span<const double> x, std::span<const double> y) {
    require_same_length(x, y);
    require(x.size() >= 2, "signal length must be >= 2");
    const std::size_t n = x.size();
    if (!Radix2Fft::admissible(n)) {
        Registration reg = register_exhaustive(x, y);
        reg.fft_fallback = true;
        return reg;
    }
    const Radix2Fft fft(n);
    const auto xs = fft.spectrum(x);
    const auto ys = fft.spectrum(y);
    std::vector<std::complex<double>> scratch(n);
    std::vector<double> c(n);
    circular_cross_correlation(fft, xs, ys, scratch, c);
    const double base = squared_norm(x) + squared_norm(y);
    std::vector<double> sq(n);
    for (std::size_t k = 0; k < n; ++k) sq[k] = std::max(0.0, base - 2.0 * c[k]);
    return pick_best(sq, uniqueness_tolerance(x, y));
}

bool is_unique_registration(std::span<const double> m, std::span<const double> y, double tol) {
    require_same_length(m, y);
    const std::size_t n = m.size();
    const Registration reg = register_fft(m, y);
    const Signal z = act(reg.element, y);
    const double c0 = dot(m, z);
    for (std::size_t k = 1; k < n; ++k) {
        const Signal gz = act(Shift{k, n}, z);
        if (std::abs(c0 - dot(m, gz)) <= tol) return false;
    }
    return true;
}

bool is_unique_registration(std::span<const double> m, std::span<const double> y) {
    return is_unique_registration(m, y, uniqueness_tolerance(m, y));
}

bool is_fixed_point(std::span<const double> x, double tol) {
    require(x.size() >= 2, "signal length must be >= 2");
    // For cyclic shifts: fixed point iff constant up to tol, since the orbit
    // permutes coordinates. max_g ||g.x - x|| is bounded by the coordinate
    // spread, so checking every shift reduces to the full pairwise check.
    const std::size_t n = x.size();
    for (std::size_t k = 1; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = x[(j + k) % n] - x[j];
            s += d * d;
        }
        if (std::sqrt(s) > tol) return false;
    }
    return true;
}

}  // namespace qte
