#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "actex/types.hpp"

namespace actex {

enum class RiskKind { Variance, StdDev, MAD, VaR, CVaR };

/// Which functional to minimize; alpha is the confidence level and only
/// meaningful for VaR/CVaR.
struct RiskSpec {
    RiskKind kind = RiskKind::Variance;
    double alpha = 0.95;

    void validate() const {
        if (kind == RiskKind::VaR || kind == RiskKind::CVaR) {
            if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("risk.alpha must lie in (0, 1)");
        }
    }
};

inline const char* risk_kind_name(RiskKind k) {
    switch (k) {
        case RiskKind::Variance: return "variance";
        case RiskKind::StdDev: return "stddev";
        case RiskKind::MAD: return "mad";
        case RiskKind::VaR: return "var";
        case RiskKind::CVaR: return "cvar";
    }
    return "?";
}

inline double expected_return(const LossDistribution& loss) {
    if (loss.empty()) throw DimensionError("loss distribution is empty");
    return std::accumulate(loss.begin(), loss.end(), 0.0) / static_cast<double>(loss.size());
}

/// Unbiased sample variance (divisor s-1). Needs s >= 2.
inline double variance(const LossDistribution& loss) {
    if (loss.size() < 2) throw DimensionError("variance needs at least 2 scenarios");
    const double m = expected_return(loss);
    double acc = 0.0;
    for (double v : loss) acc += (v - m) * (v - m);
    return acc / static_cast<double>(loss.size() - 1);
}

inline double std_dev(const LossDistribution& loss) { return std::sqrt(variance(loss)); }

/// Mean absolute deviation around the mean, divisor s.
inline double mean_abs_dev(const LossDistribution& loss) {
    if (loss.empty()) throw DimensionError("loss distribution is empty");
    const double m = expected_return(loss);
    double acc = 0.0;
    for (double v : loss) acc += std::abs(v - m);
    return acc / static_cast<double>(loss.size());
}

/**
 * Index of the lower empirical (1-alpha)-quantile in the ascending order
 * statistics: k = ceil((1-alpha)*s) - 1, clamped to [0, s-1].
 *
 * The small slack before ceil() keeps exact-boundary cases honest: with
 * alpha = 0.95 and s = 20 the real product is exactly 1 but rounds up in
 * floating point, which would otherwise shift the quantile by one scenario.
 */
inline std::size_t tail_index(double alpha, std::size_t s) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (s == 0) throw DimensionError("loss distribution is empty");
    const double t = (1.0 - alpha) * static_cast<double>(s);
    auto k = static_cast<long long>(std::ceil(t - 1e-9)) - 1;
    if (k < 0) k = 0;
    if (k > static_cast<long long>(s) - 1) k = static_cast<long long>(s) - 1;
    return static_cast<std::size_t>(k);
}

namespace detail {

// Ascending sort of the k+1 smallest entries; returns the full sorted copy
// only up to position k (nth_element + sort of the prefix).
inline Vec worst_tail(const LossDistribution& loss, std::size_t k) {
    Vec r(loss);
    if (k + 1 < r.size()) {
        std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k), r.end());
        r.resize(k + 1);
    }
    std::sort(r.begin(), r.end());
    return r;
}

}  // namespace detail

/// Signed lower quantile of returns at level alpha (what a report prints,
/// e.g. -0.03 for a 3% weekly value at risk).
inline double var_quantile(const LossDistribution& loss, double alpha) {
    const std::size_t k = tail_index(alpha, loss.size());
    Vec tail = detail::worst_tail(loss, k);
    return tail[k];
}

/// Value-at-Risk in minimization form: the negated quantile, so that
/// smaller is better.
inline double var_risk(const LossDistribution& loss, double alpha) { return -var_quantile(loss, alpha); }

/// Conditional Value-at-Risk in minimization form: negated mean of the
/// worst ceil((1-alpha)*s) scenario returns. A one-scenario tail collapses
/// to VaR.
inline double cvar_risk(const LossDistribution& loss, double alpha) {
    const std::size_t k = tail_index(alpha, loss.size());
    Vec tail = detail::worst_tail(loss, k);
    double acc = 0.0;
    for (std::size_t i = 0; i <= k; ++i) acc += tail[i];
    return -acc / static_cast<double>(k + 1);
}

/// Dispatch on the functional selector. All variants are minimized.
inline double risk(const LossDistribution& loss, const RiskSpec& spec) {
    spec.validate();
    if (loss.empty()) throw DimensionError("loss distribution is empty");
    switch (spec.kind) {
        case RiskKind::Variance: return variance(loss);
        case RiskKind::StdDev: return std_dev(loss);
        case RiskKind::MAD: return mean_abs_dev(loss);
        case RiskKind::VaR: return var_risk(loss, spec.alpha);
        case RiskKind::CVaR: return cvar_risk(loss, spec.alpha);
    }
    throw ConfigError("unknown risk kind");
}

/// All functionals over one distribution, tail measures once per alpha.
struct RiskReport {
    double mean = 0.0;
    double variance = 0.0;
    double std_dev = 0.0;
    double mad = 0.0;
    struct Tail {
        double alpha;
        double var_quantile;  // signed, as reported
        double var_risk;      // negated, as minimized
        double cvar_risk;
    };
    std::vector<Tail> tails;
};

inline RiskReport risk_report(const LossDistribution& loss, const std::vector<double>& alphas) {
    RiskReport rep;
    rep.mean = expected_return(loss);
    rep.variance = variance(loss);
    rep.std_dev = std::sqrt(rep.variance);
    rep.mad = mean_abs_dev(loss);
    rep.tails.reserve(alphas.size());
    for (double a : alphas) {
        const double q = var_quantile(loss, a);
        rep.tails.push_back({a, q, -q, cvar_risk(loss, a)});
    }
    return rep;
}

}  // namespace actex
