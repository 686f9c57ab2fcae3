#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "actex/detail/parallel.hpp"
#include "actex/objective.hpp"
#include "actex/portfolio.hpp"
#include "actex/rng.hpp"
#include "actex/scenario.hpp"

namespace actex {

struct SamplerConfig {
    ConstraintSet constraints;
    std::size_t n1 = 10000;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (n1 < 1) throw ConfigError("sampler.n1 must be >= 1");
        constraints.validate();
    }
};

namespace detail {

/// Target support size for one side: round(frac * a) half away from zero,
/// at least 1 whenever that side's sum is nonzero.
inline std::size_t support_count(double frac, std::size_t num_assets, bool side_active) {
    if (!side_active) return 0;
    auto n = static_cast<std::size_t>(std::llround(frac * static_cast<double>(num_assets)));
    if (n < 1) n = 1;
    if (n > num_assets) n = num_assets;
    return n;
}

}  // namespace detail

/**
 * Draws one random feasible portfolio with the sparsity profile of
 * risk-optimal active-extension portfolios:
 *
 *   1. pick disjoint uniform supports: round(long_frac*a) assets long,
 *      round(short_frac*a) short;
 *   2. give each support member a uniform(0,1) draw, scale the draws so the
 *      sides sum to long_sum / short_sum;
 *   3. normalize() to push entries inside the bounds.
 *
 * A support whose bounds cannot carry the budget (or a failed normalize)
 * triggers a redraw; 100 fruitless retries raise SamplingError.
 */
inline Portfolio sample_portfolio(const SamplerConfig& cfg, rng::SplitMix64& stream) {
    const ConstraintSet& c = cfg.constraints;
    const std::size_t a = c.num_assets();
    const bool short_active = c.short_sum != 0.0;
    std::size_t n_long = detail::support_count(c.long_frac, a, true);
    std::size_t n_short = detail::support_count(c.short_frac, a, short_active);
    if (n_long + n_short > a) n_short = a - n_long;  // rounding can overshoot on tiny universes

    for (int retry = 0; retry < 100; ++retry) {
        const auto support = rng::draw_distinct(n_long + n_short, a, stream);

        double long_capacity = 0.0, short_capacity = 0.0;
        for (std::size_t i = 0; i < n_long; ++i) long_capacity += c.upper[support[i]];
        for (std::size_t i = n_long; i < support.size(); ++i) short_capacity += c.lower[support[i]];
        if (long_capacity < c.long_sum || short_capacity > c.short_sum) continue;

        Portfolio x(a, 0.0);
        Vec draws(support.size());
        double long_total = 0.0, short_total = 0.0;
        for (std::size_t i = 0; i < support.size(); ++i) {
            draws[i] = stream.uniform01();
            (i < n_long ? long_total : short_total) += draws[i];
        }
        if (long_total <= 0.0 || (n_short > 0 && short_total <= 0.0)) continue;
        for (std::size_t i = 0; i < n_long; ++i) {
            if (draws[i] > 0.0) x[support[i]] = draws[i] * c.long_sum / long_total;
        }
        for (std::size_t i = n_long; i < support.size(); ++i) {
            if (draws[i] > 0.0) x[support[i]] = draws[i] * c.short_sum / short_total;
        }

        try {
            return normalize(std::move(x), c);
        } catch (const NormalizeError&) {
            continue;
        }
    }
    throw SamplingError("no feasible support found in 100 attempts; bounds and side sums leave too little room");
}

struct ScoredPortfolio {
    Portfolio x;
    double objective;
};

/**
 * n1 feasible samples scored by the search objective and sorted ascending
 * (ties keep generation order). Sample i always sees RNG substream
 * (seed, i), so the batch is reproducible and thread-count independent.
 */
inline std::vector<ScoredPortfolio> sample_batch(const SamplerConfig& cfg, const ScenarioSet& scen,
                                                 const RiskSpec& spec, MuMode mode = MuMode::Reject,
                                                 double penalty_weight = 1e4, unsigned threads = 1) {
    cfg.validate();
    spec.validate();
    if (cfg.constraints.num_assets() != scen.num_assets())
        throw DimensionError("constraints/scenario dimension mismatch");

    std::vector<ScoredPortfolio> batch(cfg.n1);
    detail::parallel_for(cfg.n1, threads, [&](std::size_t i) {
        auto stream = rng::substream(cfg.rng_seed, i);
        Portfolio x = sample_portfolio(cfg, stream);
        const double obj = objective(x, scen, spec, cfg.constraints, mode, penalty_weight);
        batch[i] = ScoredPortfolio{std::move(x), obj};
    });
    std::stable_sort(batch.begin(), batch.end(),
                     [](const ScoredPortfolio& a, const ScoredPortfolio& b) { return a.objective < b.objective; });
    return batch;
}

}  // namespace actex
