#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "actex/risk.hpp"
#include "actex/scenario.hpp"
#include "actex/types.hpp"

namespace actex {

/**
 * The feasible set of an active-extension (1x0/x0) portfolio: per-asset
 * bounds, required long- and short-side sums, an optional expected-return
 * floor mu, and the target support fractions the sampler works with.
 *
 * The 130/30 defaults: bounds [-0.1, 0.5], long side 1.30, short side
 * -0.30, 30% of assets long and 10% short.
 */
struct ConstraintSet {
    Vec lower;  // per asset, <= 0
    Vec upper;  // per asset, >= 0
    double long_sum = 1.30;
    double short_sum = -0.30;
    std::optional<double> mu;  // minimum expected portfolio return
    double long_frac = 0.3;
    double short_frac = 0.1;

    static ConstraintSet active_extension(std::size_t num_assets, double lo = -0.1, double hi = 0.5,
                                          double long_total = 1.30, double short_total = -0.30) {
        ConstraintSet c;
        c.lower.assign(num_assets, lo);
        c.upper.assign(num_assets, hi);
        c.long_sum = long_total;
        c.short_sum = short_total;
        return c;
    }

    /// Full budget on the long side, no shorting.
    static ConstraintSet long_only(std::size_t num_assets, double hi = 1.0) {
        ConstraintSet c;
        c.lower.assign(num_assets, 0.0);
        c.upper.assign(num_assets, hi);
        c.long_sum = 1.0;
        c.short_sum = 0.0;
        c.short_frac = 0.0;
        return c;
    }

    std::size_t num_assets() const { return lower.size(); }

    void validate() const {
        if (lower.size() != upper.size()) throw ConfigError("constraints.lower/upper lengths differ");
        if (lower.empty()) throw ConfigError("constraints need at least one asset");
        for (std::size_t j = 0; j < lower.size(); ++j) {
            if (!(lower[j] <= 0.0) || !(upper[j] >= 0.0))
                throw ConfigError("constraints.lower/upper must satisfy lower <= 0 <= upper (asset " +
                                  std::to_string(j) + ")");
        }
        if (!(long_sum > 0.0)) throw ConfigError("constraints.long_sum must be > 0");
        if (!(short_sum <= 0.0)) throw ConfigError("constraints.short_sum must be <= 0");
        double up_total = 0.0, lo_total = 0.0;
        for (std::size_t j = 0; j < lower.size(); ++j) {
            up_total += upper[j];
            lo_total += lower[j];
        }
        if (up_total < long_sum) throw ConfigError("constraints: sum of upper bounds cannot reach long_sum");
        if (lo_total > short_sum) throw ConfigError("constraints: sum of lower bounds cannot reach short_sum");
        if (long_frac < 0.0 || short_frac < 0.0 || long_frac + short_frac > 1.0)
            throw ConfigError("constraints.long_frac/short_frac must be >= 0 and sum to <= 1");
        if (mu && !std::isfinite(*mu)) throw ConfigError("constraints.mu must be finite");
    }
};

enum class ViolationKind { LowerBound, UpperBound, LongSum, ShortSum, ReturnFloor };

inline const char* violation_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::LowerBound: return "lower_bound";
        case ViolationKind::UpperBound: return "upper_bound";
        case ViolationKind::LongSum: return "long_sum";
        case ViolationKind::ShortSum: return "short_sum";
        case ViolationKind::ReturnFloor: return "return_floor";
    }
    return "?";
}

struct Violation {
    ViolationKind kind;
    std::ptrdiff_t asset;  // -1 for aggregate conditions
    double magnitude;      // how far past the limit
};

struct FeasibilityCheck {
    bool feasible = true;
    std::vector<Violation> violations;
    explicit operator bool() const { return feasible; }
};

/**
 * Checks bounds, both side sums and (when mu is set and scenarios are
 * given) the return floor, each to tolerance `tol`. Side membership is by
 * sign: strictly positive entries count toward the long sum, strictly
 * negative ones toward the short sum.
 */
inline FeasibilityCheck is_feasible(const Portfolio& x, const ConstraintSet& c, const ScenarioSet* scen = nullptr,
                                    double tol = 1e-8) {
    if (x.size() != c.num_assets()) throw DimensionError("portfolio/constraint dimension mismatch");
    if (scen && scen->num_assets() != x.size()) throw DimensionError("portfolio/scenario dimension mismatch");
    FeasibilityCheck out;
    double pos = 0.0, neg = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < c.lower[j] - tol)
            out.violations.push_back({ViolationKind::LowerBound, static_cast<std::ptrdiff_t>(j), c.lower[j] - x[j]});
        if (x[j] > c.upper[j] + tol)
            out.violations.push_back({ViolationKind::UpperBound, static_cast<std::ptrdiff_t>(j), x[j] - c.upper[j]});
        if (x[j] > 0.0) pos += x[j];
        if (x[j] < 0.0) neg += x[j];
    }
    if (std::abs(pos - c.long_sum) > tol)
        out.violations.push_back({ViolationKind::LongSum, -1, std::abs(pos - c.long_sum)});
    if (std::abs(neg - c.short_sum) > tol)
        out.violations.push_back({ViolationKind::ShortSum, -1, std::abs(neg - c.short_sum)});
    if (c.mu && scen) {
        const double ret = expected_return(evaluate(x, *scen));
        if (ret < *c.mu - tol) out.violations.push_back({ViolationKind::ReturnFloor, -1, *c.mu - ret});
    }
    out.feasible = out.violations.empty();
    return out;
}

namespace detail {

// Rescales one side (entries of `sign`) multiplicatively toward `target`
// total, clipping at the per-asset cap and redistributing the residual over
// the still-unclipped entries. Caps are expressed as magnitudes.
inline void normalize_side(Portfolio& x, const Vec& cap_magnitude, double target_magnitude, int sign) {
    std::vector<std::size_t> side;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if ((sign > 0 && x[j] > 0.0) || (sign < 0 && x[j] < 0.0)) side.push_back(j);
    }
    if (target_magnitude == 0.0) {
        // Degenerate side: nothing may be held there.
        for (std::size_t j : side) x[j] = 0.0;
        return;
    }
    if (side.empty())
        throw NormalizeError(NormalizeError::Kind::EmptySide,
                             sign > 0 ? "no positive weights to scale to the long sum"
                                      : "no negative weights to scale to the short sum");

    std::vector<bool> clipped(side.size(), false);
    for (int pass = 0; pass < 100; ++pass) {
        double clipped_total = 0.0, free_total = 0.0;
        bool overflow = false;  // an unclipped entry still past its cap
        for (std::size_t i = 0; i < side.size(); ++i) {
            const double mag = sign * x[side[i]];
            if (!clipped[i] && mag > cap_magnitude[side[i]]) overflow = true;
            (clipped[i] ? clipped_total : free_total) += mag;
        }
        // Matching totals alone are not convergence: a side whose sum is
        // already on budget may still hold an entry past its bound, and that
        // entry must be clipped and its excess redistributed.
        if (!overflow && std::abs(clipped_total + free_total - target_magnitude) <= 1e-9) return;
        const double need = target_magnitude - clipped_total;
        if (free_total <= 0.0 || need <= 0.0)
            throw NormalizeError(NormalizeError::Kind::NonConvergent,
                                 "bounds too tight to redistribute the requested side sum");
        const double scale = need / free_total;
        for (std::size_t i = 0; i < side.size(); ++i) {
            if (clipped[i]) continue;
            double mag = sign * x[side[i]] * scale;
            if (mag >= cap_magnitude[side[i]]) {
                mag = cap_magnitude[side[i]];
                clipped[i] = true;
            }
            x[side[i]] = mag == 0.0 ? 0.0 : sign * mag;
        }
    }
    throw NormalizeError(NormalizeError::Kind::NonConvergent, "side sums did not settle within 100 passes");
}

}  // namespace detail

/**
 * Rescales the positive and negative parts of x separately so the long side
 * sums to long_sum and the short side to short_sum, clipping entries at
 * their bound and redistributing proportionally. The sign pattern is
 * preserved: zeros stay zero and no entry crosses zero. Idempotent.
 *
 * Throws NormalizeError when a side has no mass to scale (EmptySide) or the
 * bounds cannot absorb the requested sum (NonConvergent).
 */
inline Portfolio normalize(Portfolio x, const ConstraintSet& c) {
    if (x.size() != c.num_assets()) throw DimensionError("portfolio/constraint dimension mismatch");
    Vec short_caps(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) short_caps[j] = -c.lower[j];
    detail::normalize_side(x, c.upper, c.long_sum, +1);
    detail::normalize_side(x, short_caps, -c.short_sum, -1);
    return x;
}

/// Elementwise mean. Deliberately not renormalized; improvement runs start
/// by normalizing anyway.
inline Portfolio mean_portfolio(const std::vector<Portfolio>& xs) {
    if (xs.empty()) throw DimensionError("mean of zero portfolios");
    const std::size_t n = xs[0].size();
    Portfolio m(n, 0.0);
    for (const auto& x : xs) {
        if (x.size() != n) throw DimensionError("portfolio lengths differ");
        for (std::size_t j = 0; j < n; ++j) m[j] += x[j];
    }
    for (double& v : m) v /= static_cast<double>(xs.size());
    return m;
}

// ---------------------------------------------------------------------------
// Serialization: "asset,weight" rows, shortest decimal that round-trips.

inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline void write_portfolio(std::ostream& out, const std::vector<std::string>& assets, const Portfolio& x) {
    if (assets.size() != x.size()) throw DimensionError("asset list / weight vector length mismatch");
    out << "asset,weight\n";
    for (std::size_t j = 0; j < assets.size(); ++j) out << assets[j] << ',' << format_double(x[j]) << '\n';
}

inline void write_portfolio(const std::string& path, const std::vector<std::string>& assets, const Portfolio& x) {
    std::ofstream out(path);
    if (!out) throw ParseError(ParseError::Kind::Io, 0, 0, "cannot write '" + path + "'");
    write_portfolio(out, assets, x);
}

inline std::vector<std::pair<std::string, double>> read_portfolio(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(ParseError::Kind::BadHeader, 1, 0, "empty portfolio file");
    std::vector<std::pair<std::string, double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const auto fields = detail::split_fields(line, ',');
        if (fields.size() != 2)
            throw ParseError(ParseError::Kind::MalformedRow, lineno, 0,
                             "expected 'asset,weight' at row " + std::to_string(lineno));
        rows.emplace_back(fields[0], detail::parse_cell(fields[1], lineno, 2));
    }
    return rows;
}

inline std::vector<std::pair<std::string, double>> read_portfolio(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(ParseError::Kind::Io, 0, 0, "cannot open portfolio file '" + path + "'");
    return read_portfolio(in);
}

/// Aligns named weights with a scenario set's asset order. Assets absent
/// from the file get weight 0; names unknown to the scenario set are an
/// error.
inline Portfolio align_portfolio(const std::vector<std::pair<std::string, double>>& rows,
                                 const std::vector<std::string>& assets) {
    Portfolio x(assets.size(), 0.0);
    for (const auto& [name, w] : rows) {
        const auto it = std::find(assets.begin(), assets.end(), name);
        if (it == assets.end()) throw ConfigError("portfolio names unknown asset '" + name + "'");
        x[static_cast<std::size_t>(it - assets.begin())] = w;
    }
    return x;
}

}  // namespace actex
