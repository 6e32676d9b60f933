#include "qte/maxmax.hpp"

#include <algorithm>
#include <cmath>

#include "qte/rng.hpp"

namespace qte {

namespace {

std::vector<Shift> to_shifts(const std::vector<std::size_t>& ks, std::size_t n) {
    std::vector<Shift> out(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) out[i] = Shift{ks[i], n};
    return out;
}

std::size_t count_changed(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += a[i] != b[i] ? 1 : 0;
    return c;
}

std::size_t count_ties(const DatasetRegistrar::Pass& pass, std::span<const double> m,
                       const Dataset& ds) {
    // Tie means the best and second-best squared distances are closer than
    // the scale-relative uniqueness threshold.
    const double m_norm = norm(m);
    std::size_t ties = 0;
    for (std::size_t i = 0; i < pass.margins.size(); ++i) {
        const double tol = 2e-9 * m_norm * std::sqrt(squared_norm(ds.observation(i)));
        if (pass.margins[i] <= tol) ++ties;
    }
    return ties;
}

KarcherCertificate margins_certificate(const DatasetRegistrar::Pass& pass,
                                       std::span<const double> m, const Dataset& ds) {
    KarcherCertificate cert;
    cert.margins = pass.margins;
    cert.variance_at_estimate = pass.variance;
    cert.all_unique = count_ties(pass, m, ds) == 0;
    return cert;
}

}  // namespace

std::vector<Shift> register_all(std::span<const double> m, const Dataset& ds) {
    require(ds.size() >= 1, "dataset must be non-empty");
    const DatasetRegistrar reg(ds);
    return to_shifts(reg.register_all(m).shifts, ds.dim());
}

std::pair<Signal, std::vector<Shift>> maxmax_step(std::span<const double> m, const Dataset& ds) {
    require(ds.size() >= 1, "dataset must be non-empty");
    const DatasetRegistrar reg(ds);
    const auto pass = reg.register_all(m);
    Signal next = reg.mean_registered(pass.shifts);
    // The auxiliary objective decreases on both half-steps, so the variance
    // cannot go up; treat a violation as an internal error.
    const double before = pass.variance;
    const double after = reg.register_all(next).variance;
    if (after > before)
        throw std::logic_error("max-max step increased the empirical variance");
    return {std::move(next), to_shifts(pass.shifts, ds.dim())};
}

MaxMaxResult run_maxmax(const Dataset& ds, std::optional<Signal> m0, std::size_t max_steps) {
    require(ds.size() >= 1, "dataset must be non-empty");
    require(max_steps >= 1, "max_steps must be >= 1");
    const DatasetRegistrar reg(ds);

    Signal m;
    if (m0) {
        require_same_length(*m0, ds.observation(0));
        m = std::move(*m0);
    } else {
        // Default start: all registrations at the identity.
        std::vector<std::size_t> identity(ds.size(), 0);
        m = reg.mean_registered(identity);
    }

    MaxMaxResult res;
    auto pass = reg.register_all(m);
    res.variance_history.push_back(pass.variance);
    res.trace.push_back(TraceRow{0, pass.variance, 0, count_ties(pass, m, ds)});

    std::vector<std::size_t> prev_shifts = pass.shifts;
    for (std::size_t step = 1; step <= max_steps; ++step) {
        m = reg.mean_registered(prev_shifts);
        pass = reg.register_all(m);
        res.steps = step;
        res.variance_history.push_back(pass.variance);
        res.trace.push_back(TraceRow{step, pass.variance,
                                     count_changed(prev_shifts, pass.shifts),
                                     count_ties(pass, m, ds)});
        if (pass.shifts == prev_shifts) {
            res.converged = true;
            break;
        }
        prev_shifts = pass.shifts;
    }

    res.estimate = std::move(m);
    res.registration_final = to_shifts(pass.shifts, ds.dim());
    res.certificate = margins_certificate(pass, res.estimate, ds);
    return res;
}

KarcherCertificate verify_karcher(std::span<const double> m, const Dataset& ds,
                                  std::size_t n_perturb, std::uint64_t seed) {
    require(ds.size() >= 1, "dataset must be non-empty");
    const DatasetRegistrar reg(ds);
    const auto pass = reg.register_all(m);
    KarcherCertificate cert = margins_certificate(pass, m, ds);
    if (!cert.all_unique || n_perturb == 0) return cert;

    // Half the smallest gap between best and second-best distances: within
    // this radius every observation keeps its registration, so F_I is the
    // fixed-registration quadratic around m.
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pass.sq_dist.size(); ++i) {
        const double best = std::sqrt(pass.sq_dist[i]);
        const double second = std::sqrt(pass.sq_dist[i] + pass.margins[i]);
        min_gap = std::min(min_gap, second - best);
    }
    const double radius = std::max(min_gap / 2.0, 1e-12 * norm(m));

    cert.perturbation_checked = true;
    cert.perturbation_radius = radius;
    cert.perturbations_tested = n_perturb;
    const std::size_t n = ds.dim();
    for (std::size_t t = 0; t < n_perturb; ++t) {
        Rng rng = Rng::stream(seed, t);
        Signal a(n);
        for (std::size_t j = 0; j < n; ++j) a[j] = rng.normal();
        const double a_norm = norm(a);
        for (std::size_t j = 0; j < n; ++j) a[j] = m[j] + radius * a[j] / a_norm;
        if (reg.register_all(a).variance >= cert.variance_at_estimate)
            ++cert.perturbations_passed;
    }
    return cert;
}

std::vector<MultiStartRun> multi_start(const Dataset& ds, std::size_t n_starts,
                                       std::uint64_t seed, std::size_t max_steps) {
    require(n_starts >= 1, "n_starts must be >= 1");
    const DatasetRegistrar reg(ds);
    std::vector<MultiStartRun> runs;
    runs.reserve(n_starts);
    for (std::size_t s = 0; s < n_starts; ++s) {
        std::optional<Signal> start;
        if (s > 0) {
            Rng rng = Rng::stream(seed, s);
            std::vector<std::size_t> shifts(ds.size());
            for (auto& k : shifts) k = rng.below(ds.dim());
            start = reg.mean_registered(shifts);
        }
        runs.push_back(MultiStartRun{s, run_maxmax(ds, std::move(start), max_steps)});
    }
    std::stable_sort(runs.begin(), runs.end(), [](const MultiStartRun& a, const MultiStartRun& b) {
        return a.result.variance_history.back() < b.result.variance_history.back();
    });
    return runs;
}

}  // namespace qte
