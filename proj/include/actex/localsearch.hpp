#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "actex/detail/parallel.hpp"
#include "actex/objective.hpp"
#include "actex/portfolio.hpp"
#include "actex/sampler.hpp"

namespace actex {

struct SearchConfig {
    Vec epsilons = {0.05, 0.01, 0.001};  // strictly decreasing step sizes
    std::size_t n2 = 10;                 // elite starts taken from the sample batch
    std::size_t max_iters_per_stage = 10000;
    RiskSpec risk;
    MuMode mu_mode = MuMode::Reject;
    double penalty_weight = 1e4;

    void validate() const {
        if (epsilons.empty()) throw ConfigError("search.epsilons must not be empty");
        for (std::size_t i = 0; i < epsilons.size(); ++i) {
            if (!(epsilons[i] > 0.0)) throw ConfigError("search.epsilons must all be > 0");
            if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
                throw ConfigError("search.epsilons must be strictly decreasing");
        }
        if (n2 < 1) throw ConfigError("search.n2 must be >= 1");
        if (max_iters_per_stage < 1) throw ConfigError("search.max_iters_per_stage must be >= 1");
        if (mu_mode == MuMode::Penalty && !(penalty_weight > 0.0))
            throw ConfigError("search.penalty_weight must be > 0 in penalty mode");
        risk.validate();
    }
};

/**
 * The +-eps neighborhood of a feasible portfolio: for every asset and both
 * directions, nudge that weight by eps (clamped to its bounds) and
 * renormalize the side sums. At most 2a candidates; moves the clamp turns
 * into no-ops are skipped, and candidates whose renormalization fails are
 * dropped.
 *
 * A nudge that would carry a weight across zero stops at zero instead, so
 * an asset leaves the portfolio before it may switch sides; an asset at
 * zero enters long via +eps or short via -eps. That is what lets the search
 * repair a support misassignment made at sampling time.
 */
inline std::vector<Portfolio> neighbors(const Portfolio& x, double eps, const ConstraintSet& c) {
    if (x.size() != c.num_assets()) throw DimensionError("portfolio/constraint dimension mismatch");
    std::vector<Portfolio> out;
    out.reserve(2 * x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        for (int sign : {+1, -1}) {
            double w = x[j] + sign * eps;
            if ((x[j] > 0.0 && w < 0.0) || (x[j] < 0.0 && w > 0.0)) w = 0.0;
            w = std::clamp(w, c.lower[j], c.upper[j]);
            if (w == x[j]) continue;
            Portfolio cand = x;
            cand[j] = w;
            try {
                Portfolio scaled = normalize(std::move(cand), c);
                // When every other entry on the side is pinned at its bound,
                // renormalization pushes the nudged weight straight back;
                // re-evaluating the center is pointless.
                if (scaled != x) out.push_back(std::move(scaled));
            } catch (const NormalizeError&) {
                // bounds could not absorb the shifted mass; candidate dropped
            }
        }
    }
    return out;
}

struct ImproveResult {
    Portfolio x;
    double objective = 0.0;
    std::vector<std::size_t> iters_per_stage;
    std::uint64_t evaluations = 0;
};

/**
 * Iterated eps-improvement: for each step size in turn, repeatedly move to
 * the best strictly improving neighbor until none exists, then continue
 * from that point with the next (smaller) eps. Iteration counts are
 * accepted moves per stage. Ties pick the earliest candidate (lowest asset
 * index, + before -), which makes runs reproducible.
 */
inline ImproveResult improve(const Portfolio& x0, const SearchConfig& cfg, const ScenarioSet& scen,
                             const ConstraintSet& c, unsigned threads = 1) {
    cfg.validate();
    if (auto check = is_feasible(x0, c); !check)
        throw Error("improve() needs a feasible start (" + std::string(violation_name(check.violations[0].kind)) +
                    " violated)");

    ImproveResult res;
    res.x = x0;
    res.objective = objective(res.x, scen, cfg.risk, c, cfg.mu_mode, cfg.penalty_weight);
    res.evaluations = 1;
    res.iters_per_stage.reserve(cfg.epsilons.size());

    for (double eps : cfg.epsilons) {
        std::size_t iters = 0;
        for (;;) {
            const auto cands = neighbors(res.x, eps, c);
            if (cands.empty()) break;
            Vec vals(cands.size());
            detail::parallel_for(cands.size(), threads, [&](std::size_t i) {
                vals[i] = objective(cands[i], scen, cfg.risk, c, cfg.mu_mode, cfg.penalty_weight);
            });
            res.evaluations += cands.size();
            std::size_t best = 0;
            for (std::size_t i = 1; i < cands.size(); ++i) {
                if (vals[i] < vals[best]) best = i;
            }
            if (!(vals[best] < res.objective)) break;
            if (iters >= cfg.max_iters_per_stage)
                throw SearchError("eps stage " + format_double(eps) + " hit the iteration cap of " +
                                  std::to_string(cfg.max_iters_per_stage));
            res.x = cands[best];
            res.objective = vals[best];
            ++iters;
        }
        res.iters_per_stage.push_back(iters);
    }
    return res;
}

struct StartTrace {
    Portfolio start;
    Portfolio final;
    double objective = 0.0;
    std::vector<std::size_t> iters_per_stage;
};

struct SolveReport {
    Portfolio best;
    double objective_value = 0.0;
    std::vector<std::size_t> iters_per_stage;  // of the winning improvement run
    std::vector<StartTrace> starts;
    bool averaged_restart_used = false;
    std::uint64_t total_evaluations = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline bool portfolios_differ(const std::vector<Portfolio>& xs, double tol) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        for (std::size_t j = i + 1; j < xs.size(); ++j) {
            for (std::size_t k = 0; k < xs[i].size(); ++k) {
                if (std::abs(xs[i][k] - xs[j][k]) > tol) return true;
            }
        }
    }
    return false;
}

}  // namespace detail

/**
 * The full multi-start heuristic:
 *
 *   1. sample n1 random feasible portfolios and rank them by objective;
 *   2. run eps-improvement on the n2 best;
 *   3. keep the improvement with the best objective;
 *   4. if the n2 improved portfolios still differ (max-norm above 1e-6),
 *      improve the normalized mean of them as one extra start and keep it
 *      if it beats step 3.
 *
 * The explicit constraint argument wins over the copy embedded in the
 * sampler config. With threads > 1 the batch and the n2 improvement runs
 * are spread over workers; the result is identical to a serial run.
 */
inline SolveReport multi_start(const ScenarioSet& scen, const ConstraintSet& c, const SamplerConfig& sampler_cfg,
                               const SearchConfig& search_cfg, unsigned threads = 1) {
    c.validate();
    search_cfg.validate();
    SamplerConfig scfg = sampler_cfg;
    scfg.constraints = c;

    SolveReport report;
    report.seed = scfg.rng_seed;

    const auto batch =
        sample_batch(scfg, scen, search_cfg.risk, search_cfg.mu_mode, search_cfg.penalty_weight, threads);
    report.total_evaluations += batch.size();

    const std::size_t n_starts = std::min<std::size_t>(search_cfg.n2, batch.size());
    std::vector<ImproveResult> improved(n_starts);
    detail::parallel_for(n_starts, threads, [&](std::size_t i) {
        improved[i] = improve(batch[i].x, search_cfg, scen, c, /*threads=*/1);
    });

    report.starts.reserve(n_starts);
    std::size_t winner = 0;
    std::vector<Portfolio> finals;
    finals.reserve(n_starts);
    for (std::size_t i = 0; i < n_starts; ++i) {
        report.total_evaluations += improved[i].evaluations;
        report.starts.push_back({batch[i].x, improved[i].x, improved[i].objective, improved[i].iters_per_stage});
        finals.push_back(improved[i].x);
        if (improved[i].objective < improved[winner].objective) winner = i;
    }
    report.best = improved[winner].x;
    report.objective_value = improved[winner].objective;
    report.iters_per_stage = improved[winner].iters_per_stage;

    if (n_starts > 1 && detail::portfolios_differ(finals, 1e-6)) {
        try {
            const Portfolio averaged = normalize(mean_portfolio(finals), c);
            const ImproveResult rerun = improve(averaged, search_cfg, scen, c, threads);
            report.averaged_restart_used = true;
            report.total_evaluations += rerun.evaluations;
            report.starts.push_back({averaged, rerun.x, rerun.objective, rerun.iters_per_stage});
            if (rerun.objective < report.objective_value) {
                report.best = rerun.x;
                report.objective_value = rerun.objective;
                report.iters_per_stage = rerun.iters_per_stage;
            }
        } catch (const NormalizeError&) {
            // averaged point cannot be made feasible; keep the step-3 winner
        }
    }
    return report;
}

}  // namespace actex
