#pragma once

#include <utility>
#include <vector>

#include "qte/quotient.hpp"

namespace qte {

/// Brute-force references for tests. These stay independent of the
/// iterative path: the Frechet search enumerates the whole candidate set,
/// and the gradient check uses central differences of F_I.

struct BruteForceResult {
    Signal minimizer;
    double variance = 0.0;
    std::vector<std::size_t> shifts;  // the candidate registration vector, g_1 = e
};

/// Every reachable mean has the form (1/I) sum g_i.Y_i; since F_I is an
/// orbit function, g_1 can be fixed to the identity, leaving N^(I-1)
/// candidates. Requires N^(I-1) <= 10^6. Ties resolve to the
/// lexicographically smallest registration vector.
BruteForceResult brute_force_frechet(const Dataset& ds);

/// All candidate means with g_1 = e, in lexicographic order of (g_2,...,g_I).
std::vector<Signal> enumerate_candidate_means(const Dataset& ds);

/// One step of the approximated variance gradient descent:
/// m(1-2*rho) + rho*(2/I) sum g(Y_i,m).Y_i. At rho = 1/2 this reproduces the
/// max-max update exactly.
Signal approx_gradient_step(std::span<const double> m, const Dataset& ds, double rho);

/// Central differences of F_I per coordinate. Registrations must have
/// margins well above h for the quadratic regime to hold; if they are not,
/// `margin_warning` (when given) is set instead of failing.
Signal finite_difference_variance_grad(std::span<const double> m, const Dataset& ds, double h,
                                       bool* margin_warning = nullptr);

/// The closed-form gradient 2*(m - (1/I) sum g_i.Y_i) at a point with
/// unique registrations.
Signal analytic_variance_grad(std::span<const double> m, const Dataset& ds);

}  // namespace qte
