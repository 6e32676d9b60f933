#include "qte/model.hpp"

#include <cmath>
#include <numbers>

#include "qte/rng.hpp"

namespace qte {

TemplateSpec TemplateSpec::step_default() { return TemplateSpec{}; }

TemplateSpec TemplateSpec::smooth_default() {
    TemplateSpec s;
    s.kind = Kind::smooth;
    return s;
}

TemplateSpec TemplateSpec::custom(Signal values) {
    TemplateSpec s;
    s.kind = Kind::custom;
    s.n = values.size();
    s.values = std::move(values);
    return s;
}

Signal make_template(const TemplateSpec& spec) {
    require(spec.n >= 2, "template dimension must be >= 2");
    Signal t;
    switch (spec.kind) {
        case TemplateSpec::Kind::step: {
            require(spec.length >= 1, "step length must be >= 1");
            require(spec.start < spec.n && spec.start + spec.length <= spec.n,
                    "step support must lie inside [0, N)");
            t.assign(spec.n, 0.0);
            for (std::size_t j = spec.start; j < spec.start + spec.length; ++j)
                t[j] = spec.height;
            break;
        }
        case TemplateSpec::Kind::smooth: {
            require(!spec.frequencies.empty(), "smooth template needs at least one component");
            require(spec.frequencies.size() == spec.amplitudes.size(),
                    "frequency/amplitude lists must have equal length");
            t.assign(spec.n, 0.0);
            for (std::size_t c = 0; c < spec.frequencies.size(); ++c) {
                for (std::size_t j = 0; j < spec.n; ++j) {
                    const double phase = 2.0 * std::numbers::pi * spec.frequencies[c] *
                                         static_cast<double>(j) / static_cast<double>(spec.n);
                    t[j] += spec.amplitudes[c] * std::cos(phase);
                }
            }
            break;
        }
        case TemplateSpec::Kind::custom: {
            require(spec.values.size() == spec.n, "custom values must have length N");
            t = spec.values;
            break;
        }
    }
    require_signal(t);
    if (!spec.allow_fixed_point && is_fixed_point(t, 1e-12 * (1.0 + norm(t))))
        throw InvalidArgument(
            "template is constant (a fixed point of the shift action); "
            "set allow_fixed_point to override");
    return t;
}

std::size_t sample_observation(Rng& rng, std::span<const double> t0, double sigma,
                               std::span<double> eps, std::span<double> y) {
    const std::size_t n = t0.size();
    const double coord_std = 1.0 / std::sqrt(static_cast<double>(n));
    const std::size_t k = rng.below(n);
    for (std::size_t j = 0; j < n; ++j) eps[j] = coord_std * rng.normal();
    for (std::size_t j = 0; j < n; ++j) y[j] = t0[(j + k) % n] + sigma * eps[j];
    return k;
}

Dataset Dataset::sample(const Signal& t0, double sigma, std::size_t count,
                        std::uint64_t seed, bool keep_hidden) {
    require_signal(t0);
    require(sigma >= 0.0, "sigma must be nonnegative");
    require(count >= 1, "dataset needs at least one observation");

    Dataset ds;
    ds.n_ = t0.size();
    ds.count_ = count;
    ds.sigma_ = sigma;
    ds.seed_ = seed;
    ds.template_ = t0;
    ds.data_.resize(count * ds.n_);
    ds.phis_.resize(count);
    if (keep_hidden) ds.eps_.resize(count * ds.n_);

    const std::size_t n = ds.n_;
    parallel::for_blocks(count, parallel::kDefaultBlock,
                         [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<double> scratch(n);
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = Rng::stream(seed, i);
            std::span<double> eps =
                keep_hidden ? std::span<double>{ds.eps_.data() + i * n, n}
                            : std::span<double>{scratch};
            std::span<double> y{ds.data_.data() + i * n, n};
            ds.phis_[i] = sample_observation(rng, t0, sigma, eps, y);
        }
    });

    if (!keep_hidden) ds.phis_.clear();
    return ds;
}

Dataset Dataset::sample(const TemplateSpec& spec, double sigma, std::size_t count,
                        std::uint64_t seed, bool keep_hidden) {
    Dataset ds = sample(make_template(spec), sigma, count, seed, keep_hidden);
    ds.spec_ = spec;
    return ds;
}

Dataset Dataset::from_observations(Signal t0, double sigma, std::uint64_t seed,
                                   std::vector<Signal> observations,
                                   std::optional<std::vector<std::size_t>> phis) {
    require(!observations.empty(), "dataset needs at least one observation");
    require(sigma >= 0.0, "sigma must be nonnegative");
    Dataset ds;
    ds.n_ = observations.front().size();
    require(ds.n_ >= 2, "signal length must be >= 2");
    if (!t0.empty()) {
        require(t0.size() == ds.n_, "template length does not match observations");
    } else {
        t0.assign(ds.n_, 0.0);
    }
    ds.count_ = observations.size();
    ds.sigma_ = sigma;
    ds.seed_ = seed;
    ds.template_ = std::move(t0);
    ds.data_.resize(ds.count_ * ds.n_);
    for (std::size_t i = 0; i < ds.count_; ++i) {
        require(observations[i].size() == ds.n_, "observations must share one length");
        require_signal(observations[i]);
        std::copy(observations[i].begin(), observations[i].end(),
                  ds.data_.begin() + static_cast<std::ptrdiff_t>(i * ds.n_));
    }
    if (phis) {
        require(phis->size() == ds.count_, "one hidden transform per observation");
        for (std::size_t k : *phis) require(k < ds.n_, "hidden shift out of range");
        ds.phis_ = std::move(*phis);
    }
    return ds;
}

Dataset Dataset::from_parts(Signal t0, std::optional<TemplateSpec> spec, double sigma,
                            std::uint64_t seed, std::size_t n, std::vector<double> data,
                            std::optional<std::vector<std::size_t>> phis) {
    require(n >= 2, "signal length must be >= 2");
    require(!data.empty() && data.size() % n == 0, "data size must be a multiple of N");
    require(sigma >= 0.0, "sigma must be nonnegative");
    Dataset ds;
    ds.n_ = n;
    ds.count_ = data.size() / n;
    ds.sigma_ = sigma;
    ds.seed_ = seed;
    require(t0.size() == n, "template length does not match N");
    ds.template_ = std::move(t0);
    ds.spec_ = std::move(spec);
    ds.data_ = std::move(data);
    if (phis) {
        require(phis->size() == ds.count_, "one hidden transform per observation");
        for (std::size_t k : *phis) require(k < n, "hidden shift out of range");
        ds.phis_ = std::move(*phis);
    }
    return ds;
}

Shift Dataset::phi(std::size_t i) const {
    if (phis_.empty()) throw MissingHiddenError("hidden transforms were not retained");
    require(i < count_, "observation index out of range");
    return Shift{phis_[i], n_};
}

std::span<const double> Dataset::eps(std::size_t i) const {
    if (eps_.empty()) throw MissingHiddenError("hidden noises were not retained");
    require(i < count_, "observation index out of range");
    return {eps_.data() + i * n_, n_};
}

Dataset Dataset::prefix(std::size_t count) const {
    require(count >= 1 && count <= count_, "prefix size out of range");
    Dataset ds;
    ds.n_ = n_;
    ds.count_ = count;
    ds.sigma_ = sigma_;
    ds.seed_ = seed_;
    ds.template_ = template_;
    ds.spec_ = spec_;
    ds.data_.assign(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(count * n_));
    if (!phis_.empty())
        ds.phis_.assign(phis_.begin(), phis_.begin() + static_cast<std::ptrdiff_t>(count));
    if (!eps_.empty())
        ds.eps_.assign(eps_.begin(), eps_.begin() + static_cast<std::ptrdiff_t>(count * n_));
    return ds;
}

Moments empirical_moments(const Dataset& ds) {
    Moments m;
    std::vector<double> sq(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) sq[i] = squared_norm(ds.observation(i));
    const MeanAndError me = mean_and_std_error(sq);
    m.mean_sq_norm = me.mean;
    m.mean_sq_norm_std_error = me.std_error;
    if (ds.has_hidden_noise()) {
        std::vector<double> esq(ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) esq[i] = squared_norm(ds.eps(i));
        m.mean_eps_sq_norm = pairwise_mean(esq);
    }
    if (ds.has_hidden_transforms()) {
        m.phi_histogram.assign(ds.dim(), 0);
        for (std::size_t i = 0; i < ds.size(); ++i) m.phi_histogram[ds.phi(i).k] += 1;
    }
    return m;
}

}  // namespace qte
