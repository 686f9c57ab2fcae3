#pragma once

#include <limits>

#include "actex/portfolio.hpp"
#include "actex/risk.hpp"
#include "actex/scenario.hpp"

namespace actex {

/// How a violated return floor enters the objective. Reject makes any
/// violating portfolio compare worse than every feasible one; Penalty adds
/// a smooth quadratic term so search can climb back into the feasible set.
enum class MuMode { Reject, Penalty };

/**
 * The scalar the search minimizes: risk of the loss distribution, with the
 * return floor mu folded in according to `mode`. With mu unset (or met)
 * this is exactly risk(evaluate(x, scen), spec).
 */
inline double objective(const Portfolio& x, const ScenarioSet& scen, const RiskSpec& spec, const ConstraintSet& c,
                        MuMode mode = MuMode::Reject, double penalty_weight = 1e4) {
    const LossDistribution loss = evaluate(x, scen);
    const double base = risk(loss, spec);
    if (!c.mu) return base;
    const double ret = expected_return(loss);
    if (ret >= *c.mu) return base;
    if (mode == MuMode::Reject) return std::numeric_limits<double>::infinity();
    const double gap = *c.mu - ret;
    return base + penalty_weight * gap * gap;
}

}  // namespace actex
