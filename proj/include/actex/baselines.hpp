#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "actex/lp.hpp"
#include "actex/portfolio.hpp"
#include "actex/risk.hpp"
#include "actex/scenario.hpp"
#include "actex/types.hpp"

namespace actex {

/// Per-asset mean simple return across scenarios.
inline Vec mean_returns(const ScenarioSet& scen) {
    const std::size_t s = scen.num_scenarios(), a = scen.num_assets();
    Vec m(a, 0.0);
    for (std::size_t i = 0; i < s; ++i) {
        const auto row = scen.returns.row(i);
        for (std::size_t j = 0; j < a; ++j) m[j] += row[j];
    }
    for (double& v : m) v /= static_cast<double>(s);
    return m;
}

/**
 * Unbiased sample covariance of asset returns (s-1 divisor), so that
 * x^T C x equals the sample variance of the portfolio return series.
 */
inline Matrix covariance(const ScenarioSet& scen) {
    const std::size_t s = scen.num_scenarios(), a = scen.num_assets();
    if (s < 2) throw DimensionError("covariance needs at least 2 scenarios");
    const Vec m = mean_returns(scen);
    Matrix c(a, a);
    for (std::size_t i = 0; i < s; ++i) {
        const auto row = scen.returns.row(i);
        for (std::size_t j = 0; j < a; ++j) {
            const double dj = row[j] - m[j];
            for (std::size_t k = j; k < a; ++k) c(j, k) += dj * (row[k] - m[k]);
        }
    }
    const double inv = 1.0 / static_cast<double>(s - 1);
    for (std::size_t j = 0; j < a; ++j) {
        for (std::size_t k = j; k < a; ++k) {
            c(j, k) *= inv;
            c(k, j) = c(j, k);
        }
    }
    return c;
}

enum class BaselineStatus { Optimal, Infeasible, IterationLimit };

inline const char* baseline_status_name(BaselineStatus s) {
    switch (s) {
        case BaselineStatus::Optimal: return "optimal";
        case BaselineStatus::Infeasible: return "infeasible";
        case BaselineStatus::IterationLimit: return "iteration_limit";
    }
    return "?";
}

struct BaselineStats {
    std::size_t iterations = 0;
    /// Euclidean norm of the projected-gradient mapping (QP solver only).
    double pg_norm = std::numeric_limits<double>::quiet_NaN();
    /// Worst constraint/bound residual of the returned portfolio.
    double max_residual = 0.0;
    /// max_j long_j * short_j of the LP split (CVaR solver only).
    double complementarity = std::numeric_limits<double>::quiet_NaN();
};

struct BaselineSolution {
    Portfolio x;
    double objective = std::numeric_limits<double>::quiet_NaN();
    BaselineStatus status = BaselineStatus::Optimal;
    BaselineStats stats;
};

// ---------------------------------------------------------------------------
// Long-only variance baseline: accelerated projected gradient on the
// capped simplex { x : sum x = budget, 0 <= x <= cap }.

struct QPOptions {
    std::size_t max_iterations = 1000000;
    double pg_tol = 1e-9;          // stop when ||L*(x - prox(x))||_2 falls below this
    std::size_t stall_window = 200;
    double stall_tol = 1e-13;      // relative objective change over the window
};

namespace detail {

/// Euclidean projection onto { x : sum x = total, 0 <= x <= cap }.
inline Vec project_capped_simplex(const Vec& y, const Vec& cap, double total) {
    const std::size_t n = y.size();
    double lo = y[0] - cap[0], hi = y[0];
    for (std::size_t j = 0; j < n; ++j) {
        lo = std::min(lo, y[j] - cap[j]);
        hi = std::max(hi, y[j]);
    }
    lo -= 1.0;
    auto mass = [&](double tau) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += std::clamp(y[j] - tau, 0.0, cap[j]);
        return acc;
    };
    // mass() is continuous and nonincreasing in tau; bisect to machine width.
    for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mass(mid) >= total)
            lo = mid;
        else
            hi = mid;
    }
    const double tau = 0.5 * (lo + hi);
    Vec x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = std::clamp(y[j] - tau, 0.0, cap[j]);
    return x;
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
inline double power_iteration_lmax(const Matrix& c) {
    const std::size_t n = c.rows;
    Vec v(n), w(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = 1.0 / static_cast<double>(j + 1);
    double lambda = 0.0;
    for (int it = 0; it < 500; ++it) {
        double norm = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += c(j, k) * v[k];
            w[j] = acc;
            norm += acc * acc;
        }
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        double next = 0.0;
        for (std::size_t j = 0; j < n; ++j) next += v[j] * w[j];
        for (std::size_t j = 0; j < n; ++j) v[j] = w[j] / norm;
        if (it > 3 && std::abs(next - lambda) <= 1e-13 * std::max(1.0, std::abs(next))) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::abs(lambda);
}

/**
 * FISTA with adaptive restart for  min x^T C x + q^T x  over the capped
 * simplex. Restart-on-increase keeps the iteration monotone enough for a
 * reliable projected-gradient stopping test.
 */
class CappedSimplexQP {
  public:
    CappedSimplexQP(const Matrix& c, Vec cap, double total, QPOptions opt)
        : c_(c), cap_(std::move(cap)), total_(total), opt_(opt) {
        lip_ = std::max(2.0 * power_iteration_lmax(c_) * 1.01, 1e-12);
    }

    struct Result {
        Vec x;
        double objective = 0.0;
        double pg_norm = 0.0;
        std::size_t iterations = 0;
        bool converged = false;
    };

    Result solve(const Vec& q, const Vec& start) const {
        const std::size_t n = cap_.size();
        Vec x = project_capped_simplex(start, cap_, total_);
        Vec y = x, g(n), cand(n);
        double t = 1.0;
        double fx = value(x, q);
        std::vector<double> window;
        Result res;
        for (std::size_t it = 0; it < opt_.max_iterations; ++it) {
            gradient(y, q, g);
            for (std::size_t j = 0; j < n; ++j) cand[j] = y[j] - g[j] / lip_;
            Vec xnew = project_capped_simplex(cand, cap_, total_);
            double fnew = value(xnew, q);
            if (fnew > fx) {
                // momentum overshot: restart from the last good iterate
                t = 1.0;
                gradient(x, q, g);
                for (std::size_t j = 0; j < n; ++j) cand[j] = x[j] - g[j] / lip_;
                xnew = project_capped_simplex(cand, cap_, total_);
                fnew = value(xnew, q);
            }
            const double tnext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
            for (std::size_t j = 0; j < n; ++j) y[j] = xnew[j] + (t - 1.0) / tnext * (xnew[j] - x[j]);
            t = tnext;
            x = xnew;
            fx = fnew;
            res.iterations = it + 1;

            if (it % 10 == 0 || it + 1 == opt_.max_iterations) {
                res.pg_norm = pg_norm(x, q, g, cand);
                if (res.pg_norm <= opt_.pg_tol) {
                    res.converged = true;
                    break;
                }
            }
            window.push_back(fx);
            if (window.size() > opt_.stall_window) {
                const double past = window[window.size() - 1 - opt_.stall_window];
                if (std::abs(past - fx) <= opt_.stall_tol * std::max(1.0, std::abs(fx))) {
                    res.pg_norm = pg_norm(x, q, g, cand);
                    res.converged = true;
                    break;
                }
                window.erase(window.begin());
            }
        }
        if (!res.converged) res.pg_norm = pg_norm(x, q, g, cand);
        res.x = std::move(x);
        res.objective = value(res.x, q);
        return res;
    }

    double value(const Vec& x, const Vec& q) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            double cx = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) cx += c_(j, k) * x[k];
            acc += x[j] * (cx + q[j]);
        }
        return acc;
    }

  private:
    void gradient(const Vec& x, const Vec& q, Vec& g) const {
        for (std::size_t j = 0; j < x.size(); ++j) {
            double cx = 0.0;
            for (std::size_t k = 0; k < x.size(); ++k) cx += c_(j, k) * x[k];
            g[j] = 2.0 * cx + q[j];
        }
    }

    double pg_norm(const Vec& x, const Vec& q, Vec& g, Vec& cand) const {
        gradient(x, q, g);
        for (std::size_t j = 0; j < x.size(); ++j) cand[j] = x[j] - g[j] / lip_;
        const Vec px = project_capped_simplex(cand, cap_, total_);
        double acc = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double r = lip_ * (x[j] - px[j]);
            acc += r * r;
        }
        return std::sqrt(acc);
    }

    const Matrix& c_;
    Vec cap_;
    double total_;
    QPOptions opt_;
    double lip_ = 1.0;
};

/// Largest achievable mean return on the capped simplex (greedy fill).
inline double max_mean_on_capped_simplex(const Vec& means, const Vec& cap, double total) {
    std::vector<std::size_t> order(means.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return means[a] > means[b]; });
    double budget = total, acc = 0.0;
    for (std::size_t j : order) {
        const double w = std::min(cap[j], budget);
        acc += w * means[j];
        budget -= w;
        if (budget <= 0.0) break;
    }
    return acc;
}

}  // namespace detail

/**
 * Convex reference solution for the long-only variance problem:
 *
 *     minimize   x^T C x
 *     subject to sum x = long budget, 0 <= x <= upper,
 *                mean return >= mu   (optional)
 *
 * The return floor is handled by bisecting the Lagrange multiplier of the
 * mean constraint and blending the bracketing solutions so the floor holds
 * with equality. Requires a long-only constraint set.
 */
inline BaselineSolution solve_markowitz_long_only(const ScenarioSet& scen, const ConstraintSet& c,
                                                  QPOptions opt = {}) {
    c.validate();
    if (c.short_sum != 0.0)
        throw ConfigError("variance baseline requires long-only constraints (short budget must be 0)");
    const std::size_t a = scen.num_assets();
    if (c.upper.size() != a) throw DimensionError("constraint set does not match scenario assets");

    const Matrix cov = covariance(scen);
    const detail::CappedSimplexQP qp(cov, c.upper, c.long_sum, opt);
    const Vec zero_q(a, 0.0);
    Vec start(a, c.long_sum / static_cast<double>(a));

    BaselineSolution sol;
    auto finish = [&](detail::CappedSimplexQP::Result&& r, std::size_t extra_iters) {
        sol.x = std::move(r.x);
        sol.objective = qp.value(sol.x, zero_q);
        sol.stats.pg_norm = r.pg_norm;
        sol.stats.iterations = r.iterations + extra_iters;
        sol.status = r.converged ? BaselineStatus::Optimal : BaselineStatus::IterationLimit;
        const auto check = is_feasible(sol.x, c, nullptr, 1e-6);
        for (const auto& v : check.violations) sol.stats.max_residual = std::max(sol.stats.max_residual, v.magnitude);
    };

    if (!c.mu) {
        finish(qp.solve(zero_q, start), 0);
        return sol;
    }

    const Vec means = mean_returns(scen);
    const double mu = *c.mu;
    if (mu > detail::max_mean_on_capped_simplex(means, c.upper, c.long_sum) + 1e-12) {
        sol.status = BaselineStatus::Infeasible;
        return sol;
    }
    auto mean_of = [&](const Vec& x) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a; ++j) acc += means[j] * x[j];
        return acc;
    };

    std::size_t iters = 0;
    auto solve_lagrangian = [&](double lambda, const Vec& warm) {
        Vec q(a);
        for (std::size_t j = 0; j < a; ++j) q[j] = -lambda * means[j];
        auto r = qp.solve(q, warm);
        iters += r.iterations;
        return r;
    };

    auto base = solve_lagrangian(0.0, start);
    if (mean_of(base.x) >= mu - 1e-10) {
        finish(std::move(base), iters - base.iterations);
        return sol;
    }

    // Bracket the multiplier: mean(x(lambda)) is nondecreasing in lambda.
    double lam_lo = 0.0, lam_hi = 1e-6;
    Vec x_lo = base.x;
    detail::CappedSimplexQP::Result hi_res;
    for (int grow = 0;; ++grow) {
        if (grow > 90) throw SolverError("return-floor multiplier search failed to bracket");
        hi_res = solve_lagrangian(lam_hi, x_lo);
        if (mean_of(hi_res.x) >= mu) break;
        lam_lo = lam_hi;
        x_lo = hi_res.x;
        lam_hi *= 2.0;
    }
    Vec x_hi = hi_res.x;
    for (int it = 0; it < 60; ++it) {
        const double lam = 0.5 * (lam_lo + lam_hi);
        auto r = solve_lagrangian(lam, x_hi);
        if (mean_of(r.x) >= mu) {
            lam_hi = lam;
            x_hi = r.x;
            hi_res = std::move(r);
        } else {
            lam_lo = lam;
            x_lo = r.x;
        }
    }

    // Blend the bracket endpoints so the floor binds exactly; a convex
    // combination of feasible points stays feasible.
    const double mean_lo = mean_of(x_lo), mean_hi = mean_of(x_hi);
    double theta = 1.0;
    if (mean_hi > mean_lo + 1e-15 && mean_lo < mu) theta = std::min(1.0, (mu - mean_lo) / (mean_hi - mean_lo));
    detail::CappedSimplexQP::Result blended = hi_res;
    blended.x.resize(a);
    for (std::size_t j = 0; j < a; ++j) blended.x[j] = theta * x_hi[j] + (1.0 - theta) * x_lo[j];
    finish(std::move(blended), iters - hi_res.iterations);
    return sol;
}

// ---------------------------------------------------------------------------
// Expected-shortfall LP baseline.

/**
 * Builds the shortfall LP
 *
 *     minimize   zeta + (1/m) * sum_i z_i
 *     subject to z_i >= loss_i(x) - zeta,  z_i >= 0
 *                sum(long side) = long budget, sum(short side) = |short budget|
 *                per-asset bounds, optional return floor
 *
 * where loss_i(x) = -<x, scenario_i> and m is the integer tail count at
 * level alpha. With that divisor the inner minimum over zeta is exactly
 * the mean of the m worst losses, so the LP objective can be compared
 * digit-for-digit against the empirical tail mean of its own solution.
 * Signed positions are split as x = long - short with long, short >= 0.
 */
inline LPModel build_cvar_lp(const ScenarioSet& scen, const ConstraintSet& c, double alpha,
                             std::optional<double> mu = std::nullopt) {
    c.validate();
    RiskSpec{RiskKind::CVaR, alpha}.validate();
    const std::size_t s = scen.num_scenarios(), a = scen.num_assets();
    if (c.upper.size() != a) throw DimensionError("constraint set does not match scenario assets");
    const bool shorting = c.short_sum != 0.0;
    const double m = static_cast<double>(tail_index(alpha, s) + 1);

    LPModel lp;
    std::vector<std::size_t> plus(a), minus(shorting ? a : 0);
    for (std::size_t j = 0; j < a; ++j)
        plus[j] = lp.add_variable("long_" + scen.assets[j], 0.0, 0.0, c.upper[j]);
    if (shorting) {
        for (std::size_t j = 0; j < a; ++j)
            minus[j] = lp.add_variable("short_" + scen.assets[j], 0.0, 0.0, -c.lower[j]);
    }
    const std::size_t zp = lp.add_variable("zeta_pos", 1.0);
    const std::size_t zm = lp.add_variable("zeta_neg", -1.0);
    std::vector<std::size_t> z(s);
    for (std::size_t i = 0; i < s; ++i) z[i] = lp.add_variable("excess_" + std::to_string(i), 1.0 / m);

    const std::size_t n = lp.num_vars();
    for (std::size_t i = 0; i < s; ++i) {
        // loss_i - zeta - z_i <= 0
        Vec row(n, 0.0);
        const auto r = scen.returns.row(i);
        for (std::size_t j = 0; j < a; ++j) {
            row[plus[j]] = -r[j];
            if (shorting) row[minus[j]] = r[j];
        }
        row[zp] = -1.0;
        row[zm] = 1.0;
        row[z[i]] = -1.0;
        lp.add_ub(std::move(row), 0.0);
    }
    {
        Vec row(n, 0.0);
        for (std::size_t j = 0; j < a; ++j) row[plus[j]] = 1.0;
        lp.add_eq(std::move(row), c.long_sum);
    }
    if (shorting) {
        Vec row(n, 0.0);
        for (std::size_t j = 0; j < a; ++j) row[minus[j]] = 1.0;
        lp.add_eq(std::move(row), -c.short_sum);
    }
    if (mu) {
        // mean return >= mu  ->  -sum_j mean_j x_j <= -mu
        const Vec means = mean_returns(scen);
        Vec row(n, 0.0);
        for (std::size_t j = 0; j < a; ++j) {
            row[plus[j]] = -means[j];
            if (shorting) row[minus[j]] = means[j];
        }
        lp.add_ub(std::move(row), -*mu);
    }
    return lp;
}

/// Solves the shortfall LP and folds the split back into signed weights.
inline BaselineSolution solve_cvar_lp(const ScenarioSet& scen, const ConstraintSet& c, double alpha,
                                      std::optional<double> mu = std::nullopt, SimplexOptions opt = {}) {
    const LPModel lp = build_cvar_lp(scen, c, alpha, mu);
    const LPSolution ls = solve_simplex(lp, opt);
    BaselineSolution sol;
    sol.stats.iterations = ls.iterations;
    sol.stats.max_residual = ls.max_violation;
    switch (ls.status) {
        case LPStatus::Optimal: sol.status = BaselineStatus::Optimal; break;
        case LPStatus::Infeasible: sol.status = BaselineStatus::Infeasible; return sol;
        case LPStatus::IterationLimit: sol.status = BaselineStatus::IterationLimit; return sol;
        case LPStatus::Unbounded: throw SolverError("shortfall LP reported unbounded on a bounded feasible set");
    }
    const std::size_t a = scen.num_assets();
    const bool shorting = c.short_sum != 0.0;
    sol.x.assign(a, 0.0);
    sol.stats.complementarity = 0.0;
    for (std::size_t j = 0; j < a; ++j) {
        const double p = ls.x[j];
        const double q = shorting ? ls.x[a + j] : 0.0;
        sol.x[j] = p - q;
        sol.stats.complementarity = std::max(sol.stats.complementarity, p * q);
    }
    sol.objective = ls.objective;
    return sol;
}

// ---------------------------------------------------------------------------
// Exhaustive grid oracle for very small instances.

/**
 * Enumerates every portfolio whose weights are integer multiples of `grid`
 * within the per-asset bounds and whose side sums land within grid/2 of
 * the budgets, and returns the best one under `spec`. Ties within
 * 1e-12*(1+|best|) keep the first (lexicographically smallest) portfolio.
 * The return floor is ignored; use the oracle on risk-only problems.
 * Guards: at most 5 assets, grid no finer than 0.005, and at most 1e8 raw
 * grid combinations — otherwise EnumerationError.
 */
inline BaselineSolution grid_oracle(const ScenarioSet& scen, const ConstraintSet& c, const RiskSpec& spec,
                                    double grid = 0.005) {
    c.validate();
    spec.validate();
    const std::size_t a = scen.num_assets();
    if (c.upper.size() != a) throw DimensionError("constraint set does not match scenario assets");
    if (a > 5) throw EnumerationError("grid oracle supports at most 5 assets, got " + std::to_string(a));
    if (!(grid >= 0.005))
        throw EnumerationError("grid oracle step must be at least 0.005, got " + format_double(grid));

    std::vector<long> lo(a), hi(a);
    double combos = 1.0;
    for (std::size_t j = 0; j < a; ++j) {
        lo[j] = static_cast<long>(std::ceil(c.lower[j] / grid - 1e-9));
        hi[j] = static_cast<long>(std::floor(c.upper[j] / grid + 1e-9));
        if (hi[j] < lo[j]) throw EnumerationError("grid step skips the feasible range of an asset");
        combos *= static_cast<double>(hi[j] - lo[j] + 1);
    }
    if (combos > 1e8)
        throw EnumerationError("grid enumeration would visit " + format_double(combos) +
                               " combinations (budget is 1e8); coarsen the grid");

    // Suffix bounds on achievable positive and negative mass, for pruning.
    Vec pos_min(a + 1, 0.0), pos_max(a + 1, 0.0), neg_min(a + 1, 0.0), neg_max(a + 1, 0.0);
    for (std::size_t j = a; j-- > 0;) {
        const double wlo = static_cast<double>(lo[j]) * grid, whi = static_cast<double>(hi[j]) * grid;
        pos_min[j] = pos_min[j + 1] + std::max(wlo, 0.0);
        pos_max[j] = pos_max[j + 1] + std::max(whi, 0.0);
        neg_min[j] = neg_min[j + 1] + std::min(wlo, 0.0);
        neg_max[j] = neg_max[j + 1] + std::min(whi, 0.0);
    }

    const double half = 0.5 * grid + 1e-12;
    Vec x(a, 0.0);
    BaselineSolution best;
    best.status = BaselineStatus::Optimal;
    bool found = false;
    std::size_t evaluated = 0;

    auto recurse = [&](auto&& self, std::size_t depth, double pos, double neg) -> void {
        if (pos + pos_max[depth] < c.long_sum - half || pos + pos_min[depth] > c.long_sum + half) return;
        if (neg + neg_min[depth] > c.short_sum + half || neg + neg_max[depth] < c.short_sum - half) return;
        if (depth == a) {
            ++evaluated;
            const double obj = risk(evaluate(x, scen), spec);
            if (!found || obj < best.objective - 1e-12 * (1.0 + std::abs(best.objective))) {
                best.objective = obj;
                best.x = x;
                found = true;
            }
            return;
        }
        for (long g = lo[depth]; g <= hi[depth]; ++g) {
            const double w = static_cast<double>(g) * grid;
            x[depth] = w;
            self(self, depth + 1, pos + std::max(w, 0.0), neg + std::min(w, 0.0));
        }
        x[depth] = 0.0;
    };
    recurse(recurse, 0, 0.0, 0.0);

    if (!found) throw EnumerationError("no grid portfolio satisfies the side budgets");
    best.stats.iterations = evaluated;
    const auto check = is_feasible(best.x, c, nullptr, half + 1e-9);
    for (const auto& v : check.violations) best.stats.max_residual = std::max(best.stats.max_residual, v.magnitude);
    return best;
}

}  // namespace actex
