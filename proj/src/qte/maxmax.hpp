#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qte/quotient.hpp"

namespace qte {

/// Evidence that an estimate is a strict local minimizer of the empirical
/// variance: every observation registers uniquely (positive margin), and
/// optionally F_I does not decrease under random perturbations of radius
/// `perturbation_radius` (half the smallest best-to-second-best distance
/// gap, floored at 1e-12 * ||m||).
struct KarcherCertificate {
    std::vector<double> margins;  // per-observation squared-distance gaps
    bool all_unique = false;
    bool perturbation_checked = false;
    double perturbation_radius = 0.0;
    std::size_t perturbations_tested = 0;
    std::size_t perturbations_passed = 0;
    double variance_at_estimate = 0.0;
};

struct TraceRow {
    std::size_t step = 0;
    double variance = 0.0;
    std::size_t registrations_changed = 0;
    std::size_t ties = 0;  // observations whose registration margin is below tolerance
};

struct MaxMaxResult {
    Signal estimate;
    std::size_t steps = 0;
    std::vector<double> variance_history;       // F_I at each iterate, non-increasing
    std::vector<Shift> registration_final;
    bool converged = false;
    KarcherCertificate certificate;              // margins only; see verify_karcher
    std::vector<TraceRow> trace;
};

/// Per-observation argmin over g of ||m - g.Y_i||, smallest-index tie-break.
std::vector<Shift> register_all(std::span<const double> m, const Dataset& ds);

/// One alternating step: register everything to m, then average the
/// registered observations. The empirical variance cannot increase.
std::pair<Signal, std::vector<Shift>> maxmax_step(std::span<const double> m, const Dataset& ds);

/// Alternating minimization of the empirical variance, started from `m0`
/// (default: the plain mean of the observations, i.e. all shifts identity).
/// Stops when the registration vector repeats between consecutive steps —
/// the mean is a function of the registrations, so this is exactly the
/// fixed-point condition — or after max_steps, reported via `converged`.
MaxMaxResult run_maxmax(const Dataset& ds, std::optional<Signal> m0, std::size_t max_steps);

/// Margin certificate plus, when every registration is unique, `n_perturb`
/// random points at the margin-derived radius checked for F_I(a) >= F_I(m).
KarcherCertificate verify_karcher(std::span<const double> m, const Dataset& ds,
                                  std::size_t n_perturb, std::uint64_t seed);

struct MultiStartRun {
    std::size_t start_index = 0;  // 0 is the default start
    MaxMaxResult result;
};

/// Runs from the default start plus n_starts-1 random starts of the form
/// (1/I) sum g_i.Y_i with uniformly drawn g_i. Sorted by final variance.
std::vector<MultiStartRun> multi_start(const Dataset& ds, std::size_t n_starts,
                                       std::uint64_t seed, std::size_t max_steps);

}  // namespace qte
