#include "qte/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qte {

namespace {

bool next_odometer(std::vector<std::size_t>& digits, std::size_t base) {
    // Advances (g_2,...,g_I) in lexicographic order, last digit fastest.
    for (std::size_t pos = digits.size(); pos-- > 0;) {
        if (++digits[pos] < base) return true;
        digits[pos] = 0;
    }
    return false;
}

Signal candidate_mean(const Dataset& ds, const std::vector<std::size_t>& tail) {
    const std::size_t n = ds.dim();
    Signal m(n, 0.0);
    {
        const auto y = ds.observation(0);
        for (std::size_t j = 0; j < n; ++j) m[j] += y[j];
    }
    for (std::size_t i = 1; i < ds.size(); ++i) {
        const auto y = ds.observation(i);
        const std::size_t k = tail[i - 1];
        for (std::size_t j = 0; j < n; ++j) m[j] += y[(j + k) % n];
    }
    const double inv = 1.0 / static_cast<double>(ds.size());
    for (std::size_t j = 0; j < n; ++j) m[j] *= inv;
    return m;
}

void require_desk_scale(const Dataset& ds) {
    const double candidates =
        std::pow(static_cast<double>(ds.dim()), static_cast<double>(ds.size() - 1));
    require(candidates <= 1e6, "candidate set too large for brute force");
}

}  // namespace

BruteForceResult brute_force_frechet(const Dataset& ds) {
    require(ds.size() >= 1, "dataset must be non-empty");
    require_desk_scale(ds);
    const DatasetRegistrar reg(ds);
    BruteForceResult best;
    best.variance = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> tail(ds.size() - 1, 0);
    do {
        Signal m = candidate_mean(ds, tail);
        const double v = reg.variance_at(m);
        if (v < best.variance) {
            best.variance = v;
            best.minimizer = std::move(m);
            best.shifts.assign(1, 0);
            best.shifts.insert(best.shifts.end(), tail.begin(), tail.end());
        }
    } while (next_odometer(tail, ds.dim()));
    return best;
}

std::vector<Signal> enumerate_candidate_means(const Dataset& ds) {
    require(ds.size() >= 1, "dataset must be non-empty");
    require_desk_scale(ds);
    std::vector<Signal> out;
    std::vector<std::size_t> tail(ds.size() - 1, 0);
    do {
        out.push_back(candidate_mean(ds, tail));
    } while (next_odometer(tail, ds.dim()));
    return out;
}

Signal approx_gradient_step(std::span<const double> m, const Dataset& ds, double rho) {
    require(ds.size() >= 1, "dataset must be non-empty");
    const DatasetRegistrar reg(ds);
    const auto pass = reg.register_all(m);
    const Signal registered_mean = reg.mean_registered(pass.shifts);
    const std::size_t n = ds.dim();
    Signal out(n);
    // m(1-2*rho) + rho*(2/I) sum g_i.Y_i, written so that rho = 1/2 cancels
    // the first term exactly and the second reduces to the plain mean.
    for (std::size_t j = 0; j < n; ++j)
        out[j] = m[j] * (1.0 - 2.0 * rho) + rho * (2.0 * registered_mean[j]);
    return out;
}

Signal analytic_variance_grad(std::span<const double> m, const Dataset& ds) {
    const DatasetRegistrar reg(ds);
    const auto pass = reg.register_all(m);
    const Signal registered_mean = reg.mean_registered(pass.shifts);
    Signal grad(ds.dim());
    for (std::size_t j = 0; j < ds.dim(); ++j) grad[j] = 2.0 * (m[j] - registered_mean[j]);
    return grad;
}

Signal finite_difference_variance_grad(std::span<const double> m, const Dataset& ds, double h,
                                       bool* margin_warning) {
    require(h > 0.0, "finite-difference step must be positive");
    const DatasetRegistrar reg(ds);
    if (margin_warning) {
        const auto pass = reg.register_all(m);
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pass.sq_dist.size(); ++i) {
            const double best = std::sqrt(pass.sq_dist[i]);
            min_gap = std::min(min_gap, std::sqrt(pass.sq_dist[i] + pass.margins[i]) - best);
        }
        *margin_warning = !(min_gap / 2.0 > h);
    }
    const std::size_t n = ds.dim();
    Signal grad(n);
    Signal probe(m.begin(), m.end());
    for (std::size_t j = 0; j < n; ++j) {
        const double mj = probe[j];
        probe[j] = mj + h;
        const double up = reg.variance_at(probe);
        probe[j] = mj - h;
        const double down = reg.variance_at(probe);
        probe[j] = mj;
        grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

}  // namespace qte
