#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "actex/types.hpp"

namespace actex {

/**
 * Dense linear program in the form
 *
 *     minimize    c^T x
 *     subject to  A_eq x  = b_eq
 *                 A_ub x <= b_ub
 *                 lower <= x <= upper
 *
 * Lower bounds must be finite (split a free variable into a difference of
 * two nonnegative ones); upper bounds may be +infinity. Rows are stored
 * dense, which is comfortable for the <= 100 asset / <= 1000 scenario
 * envelope this library targets.
 */
struct LPModel {
    std::vector<std::string> var_names;
    Vec objective;
    Vec lower;
    Vec upper;
    std::vector<Vec> eq_rows;
    Vec eq_rhs;
    std::vector<Vec> ub_rows;
    Vec ub_rhs;

    std::size_t num_vars() const { return objective.size(); }

    std::size_t add_variable(std::string name, double cost = 0.0, double lo = 0.0,
                             double hi = std::numeric_limits<double>::infinity()) {
        var_names.push_back(std::move(name));
        objective.push_back(cost);
        lower.push_back(lo);
        upper.push_back(hi);
        return objective.size() - 1;
    }

    void add_eq(Vec row, double rhs) {
        eq_rows.push_back(std::move(row));
        eq_rhs.push_back(rhs);
    }

    void add_ub(Vec row, double rhs) {
        ub_rows.push_back(std::move(row));
        ub_rhs.push_back(rhs);
    }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t j = 0; j < var_names.size(); ++j) {
            if (var_names[j] == name) return j;
        }
        throw ConfigError("no LP variable named '" + name + "'");
    }

    void validate() const {
        const std::size_t n = num_vars();
        if (n == 0) throw ConfigError("LP has no variables");
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(lower[j])) throw ConfigError("LP lower bounds must be finite");
            if (upper[j] < lower[j]) throw ConfigError("LP variable has upper < lower");
        }
        for (const auto& r : eq_rows) {
            if (r.size() != n) throw DimensionError("LP equality row length mismatch");
        }
        for (const auto& r : ub_rows) {
            if (r.size() != n) throw DimensionError("LP inequality row length mismatch");
        }
        if (eq_rows.size() != eq_rhs.size() || ub_rows.size() != ub_rhs.size())
            throw DimensionError("LP row/rhs count mismatch");
    }
};

enum class LPStatus { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* lp_status_name(LPStatus s) {
    switch (s) {
        case LPStatus::Optimal: return "optimal";
        case LPStatus::Infeasible: return "infeasible";
        case LPStatus::Unbounded: return "unbounded";
        case LPStatus::IterationLimit: return "iteration_limit";
    }
    return "?";
}

struct SimplexOptions {
    std::size_t max_iterations = 50000;
    double tol = 1e-9;
};

struct LPSolution {
    LPStatus status = LPStatus::IterationLimit;
    Vec x;
    double objective = 0.0;
    std::size_t iterations = 0;
    double max_violation = 0.0;  // worst constraint/bound residual of x
};

namespace detail {

/**
 * Two-phase primal simplex on the full dense tableau. Finite upper bounds
 * become explicit rows. Pivoting uses Dantzig's rule (most negative
 * reduced cost); after 5*(rows+cols) consecutive degenerate pivots it
 * switches to Bland's rule, which cannot cycle.
 */
class SimplexTableau {
  public:
    SimplexTableau(const LPModel& model, const SimplexOptions& opt) : model_(model), opt_(opt) { build(); }

    LPSolution solve() {
        LPSolution sol;
        // Phase 1: minimize the artificial sum to find a basic feasible point.
        if (num_artificials_ > 0) {
            const PhaseOutcome out = run_phase(cost1_, /*phase_one=*/true);
            sol.iterations = iterations_;
            if (out == PhaseOutcome::IterationLimit) {
                sol.status = LPStatus::IterationLimit;
                return sol;
            }
            if (artificial_residual() > 1e-7) {
                sol.status = LPStatus::Infeasible;
                return sol;
            }
            purge_artificials();
        }
        const PhaseOutcome out = run_phase(cost2_, /*phase_one=*/false);
        sol.iterations = iterations_;
        if (out == PhaseOutcome::IterationLimit) {
            sol.status = LPStatus::IterationLimit;
            return sol;
        }
        if (out == PhaseOutcome::Unbounded) {
            sol.status = LPStatus::Unbounded;
            return sol;
        }
        sol.status = LPStatus::Optimal;
        extract(sol);
        return sol;
    }

  private:
    enum class PhaseOutcome { Optimal, Unbounded, IterationLimit };

    const LPModel& model_;
    SimplexOptions opt_;
    std::size_t n_struct_ = 0;      // shifted structural variables
    std::size_t n_cols_ = 0;        // structural + slacks + artificials
    std::size_t first_slack_ = 0;
    std::size_t first_artificial_ = 0;
    std::size_t num_artificials_ = 0;
    std::vector<Vec> rows_;         // each length n_cols_ + 1, last cell = rhs
    Vec cost1_, cost2_;             // reduced-cost rows, same layout
    std::vector<std::size_t> basis_;
    std::size_t iterations_ = 0;
    std::size_t degenerate_streak_ = 0;
    bool bland_ = false;

    void build() {
        model_.validate();
        n_struct_ = model_.num_vars();

        // Work on y = x - lower >= 0 and add explicit rows y_j <= upper - lower.
        std::vector<Vec> raw_rows;
        Vec raw_rhs;
        std::vector<bool> is_eq;
        for (std::size_t i = 0; i < model_.eq_rows.size(); ++i) {
            raw_rows.push_back(model_.eq_rows[i]);
            raw_rhs.push_back(model_.eq_rhs[i] - shift_correction(model_.eq_rows[i]));
            is_eq.push_back(true);
        }
        for (std::size_t i = 0; i < model_.ub_rows.size(); ++i) {
            raw_rows.push_back(model_.ub_rows[i]);
            raw_rhs.push_back(model_.ub_rhs[i] - shift_correction(model_.ub_rows[i]));
            is_eq.push_back(false);
        }
        for (std::size_t j = 0; j < n_struct_; ++j) {
            if (!std::isfinite(model_.upper[j])) continue;
            Vec row(n_struct_, 0.0);
            row[j] = 1.0;
            raw_rows.push_back(std::move(row));
            raw_rhs.push_back(model_.upper[j] - model_.lower[j]);
            is_eq.push_back(false);
        }

        const std::size_t m = raw_rows.size();
        std::size_t num_slacks = 0;
        for (bool e : is_eq) {
            if (!e) ++num_slacks;
        }
        // Count artificials: every equality row, plus inequality rows whose
        // rhs is negative after the sign flip (their slack enters at -1).
        num_artificials_ = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (is_eq[i] || raw_rhs[i] < 0.0) ++num_artificials_;
        }
        first_slack_ = n_struct_;
        first_artificial_ = n_struct_ + num_slacks;
        n_cols_ = first_artificial_ + num_artificials_;

        rows_.assign(m, Vec(n_cols_ + 1, 0.0));
        basis_.assign(m, 0);
        std::size_t slack = first_slack_, artificial = first_artificial_;
        for (std::size_t i = 0; i < m; ++i) {
            const double sign = raw_rhs[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_struct_; ++j) rows_[i][j] = sign * raw_rows[i][j];
            rows_[i][n_cols_] = sign * raw_rhs[i];
            if (!is_eq[i]) rows_[i][slack++] = sign;  // slack or surplus
            if (is_eq[i] || sign < 0.0) {
                rows_[i][artificial] = 1.0;
                basis_[i] = artificial++;
            } else {
                basis_[i] = slack - 1;
            }
        }

        cost2_.assign(n_cols_ + 1, 0.0);
        for (std::size_t j = 0; j < n_struct_; ++j) cost2_[j] = model_.objective[j];
        cost1_.assign(n_cols_ + 1, 0.0);
        for (std::size_t j = first_artificial_; j < n_cols_; ++j) cost1_[j] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (basis_[i] >= first_artificial_) {
                for (std::size_t j = 0; j <= n_cols_; ++j) cost1_[j] -= rows_[i][j];
            }
        }
    }

    // c^T lower, the constant absorbed when shifting x to y.
    double shift_correction(const Vec& row) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < n_struct_; ++j) acc += row[j] * model_.lower[j];
        return acc;
    }

    double artificial_residual() const {
        double acc = 0.0;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (basis_[i] >= first_artificial_) acc += rows_[i][n_cols_];
        }
        return acc;
    }

    /**
     * After phase 1 an artificial can remain basic at value zero. Pivot
     * each one onto any genuine column in its row so that phase-2 pivots
     * cannot grow it back. A row with no such column is redundant: it is
     * zero in every genuine column, so later eliminations (whose pivot
     * columns are all genuine) leave it untouched.
     */
    void purge_artificials() {
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (basis_[i] < first_artificial_) continue;
            for (std::size_t c = 0; c < first_artificial_; ++c) {
                if (std::abs(rows_[i][c]) > opt_.tol) {
                    pivot(i, c);
                    break;
                }
            }
        }
    }

    bool eligible(std::size_t col, bool phase_one) const {
        if (phase_one) return true;
        return col < first_artificial_;  // artificials may not re-enter
    }

    PhaseOutcome run_phase(Vec& cost, bool phase_one) {
        const double tol = opt_.tol;
        for (; iterations_ < opt_.max_iterations; ++iterations_) {
            // entering column
            std::size_t enter = n_cols_;
            if (bland_) {
                for (std::size_t j = 0; j < n_cols_; ++j) {
                    if (eligible(j, phase_one) && cost[j] < -tol) {
                        enter = j;
                        break;
                    }
                }
            } else {
                double best = -tol;
                for (std::size_t j = 0; j < n_cols_; ++j) {
                    if (eligible(j, phase_one) && cost[j] < best) {
                        best = cost[j];
                        enter = j;
                    }
                }
            }
            if (enter == n_cols_) return PhaseOutcome::Optimal;

            // ratio test; ties resolved toward the smallest basic index,
            // which is also what Bland's rule requires
            std::size_t leave = rows_.size();
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < rows_.size(); ++i) {
                const double a = rows_[i][enter];
                if (a <= tol) continue;
                const double ratio = rows_[i][n_cols_] / a;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 && (leave == rows_.size() || basis_[i] < basis_[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
            if (leave == rows_.size()) return PhaseOutcome::Unbounded;

            if (best_ratio <= tol) {
                if (++degenerate_streak_ > 5 * (rows_.size() + n_cols_)) bland_ = true;
            } else {
                degenerate_streak_ = 0;
                bland_ = false;
            }
            pivot(leave, enter);
        }
        return PhaseOutcome::IterationLimit;
    }

    void pivot(std::size_t r, std::size_t c) {
        Vec& prow = rows_[r];
        const double inv = 1.0 / prow[c];
        for (double& v : prow) v *= inv;
        prow[c] = 1.0;
        auto eliminate = [&](Vec& row) {
            const double factor = row[c];
            if (factor == 0.0) return;
            for (std::size_t j = 0; j <= n_cols_; ++j) row[j] -= factor * prow[j];
            row[c] = 0.0;
        };
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (i != r) eliminate(rows_[i]);
        }
        eliminate(cost1_);
        eliminate(cost2_);
        basis_[r] = c;
    }

    void extract(LPSolution& sol) const {
        Vec y(n_struct_, 0.0);
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (basis_[i] < n_struct_) y[basis_[i]] = rows_[i][n_cols_];
        }
        sol.x.resize(n_struct_);
        sol.objective = 0.0;
        for (std::size_t j = 0; j < n_struct_; ++j) {
            sol.x[j] = y[j] + model_.lower[j];
            sol.objective += model_.objective[j] * sol.x[j];
        }
        sol.max_violation = 0.0;
        auto track = [&](double v) { sol.max_violation = std::max(sol.max_violation, v); };
        for (std::size_t i = 0; i < model_.eq_rows.size(); ++i) {
            double acc = -model_.eq_rhs[i];
            for (std::size_t j = 0; j < n_struct_; ++j) acc += model_.eq_rows[i][j] * sol.x[j];
            track(std::abs(acc));
        }
        for (std::size_t i = 0; i < model_.ub_rows.size(); ++i) {
            double acc = -model_.ub_rhs[i];
            for (std::size_t j = 0; j < n_struct_; ++j) acc += model_.ub_rows[i][j] * sol.x[j];
            track(acc);
        }
        for (std::size_t j = 0; j < n_struct_; ++j) {
            track(model_.lower[j] - sol.x[j]);
            track(sol.x[j] - model_.upper[j]);
        }
    }
};

}  // namespace detail

inline LPSolution solve_simplex(const LPModel& model, SimplexOptions opt = {}) {
    return detail::SimplexTableau(model, opt).solve();
}

// ---------------------------------------------------------------------------
// MPS interchange dump (fixed layout). Rows and columns get generated
// 8-character names; the original variable names are kept as comments.

namespace detail {

inline std::string mps_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.5E", v);
    return buf;
}

inline void mps_entry(std::ostream& out, const std::string& name, const std::string& row, double v) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "    %-8s  %-8s  %-12s", name.c_str(), row.c_str(), mps_value(v).c_str());
    out << buf << '\n';
}

}  // namespace detail

inline void write_mps(const LPModel& model, std::ostream& out, const std::string& problem_name = "ACTEXLP") {
    model.validate();
    const std::size_t n = model.num_vars();
    auto col_name = [](std::size_t j) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "C%07zu", j + 1);
        return std::string(buf);
    };
    auto row_name = [](char kind, std::size_t i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%c%07zu", kind, i + 1);
        return std::string(buf);
    };

    out << "NAME          " << problem_name << '\n';
    for (std::size_t j = 0; j < n; ++j) out << "* " << col_name(j) << " = " << model.var_names[j] << '\n';
    out << "ROWS\n";
    out << " N  OBJ\n";
    for (std::size_t i = 0; i < model.eq_rows.size(); ++i) out << " E  " << row_name('E', i) << '\n';
    for (std::size_t i = 0; i < model.ub_rows.size(); ++i) out << " L  " << row_name('L', i) << '\n';
    out << "COLUMNS\n";
    for (std::size_t j = 0; j < n; ++j) {
        const std::string cn = col_name(j);
        if (model.objective[j] != 0.0) detail::mps_entry(out, cn, "OBJ", model.objective[j]);
        for (std::size_t i = 0; i < model.eq_rows.size(); ++i) {
            if (model.eq_rows[i][j] != 0.0) detail::mps_entry(out, cn, row_name('E', i), model.eq_rows[i][j]);
        }
        for (std::size_t i = 0; i < model.ub_rows.size(); ++i) {
            if (model.ub_rows[i][j] != 0.0) detail::mps_entry(out, cn, row_name('L', i), model.ub_rows[i][j]);
        }
    }
    out << "RHS\n";
    for (std::size_t i = 0; i < model.eq_rhs.size(); ++i) {
        if (model.eq_rhs[i] != 0.0) detail::mps_entry(out, "RHS", row_name('E', i), model.eq_rhs[i]);
    }
    for (std::size_t i = 0; i < model.ub_rhs.size(); ++i) {
        if (model.ub_rhs[i] != 0.0) detail::mps_entry(out, "RHS", row_name('L', i), model.ub_rhs[i]);
    }
    out << "BOUNDS\n";
    for (std::size_t j = 0; j < n; ++j) {
        if (model.lower[j] != 0.0) {
            char buf[80];
            std::snprintf(buf, sizeof(buf), " LO %-8s  %-8s  %-12s", "BND", col_name(j).c_str(),
                          detail::mps_value(model.lower[j]).c_str());
            out << buf << '\n';
        }
        if (std::isfinite(model.upper[j])) {
            char buf[80];
            std::snprintf(buf, sizeof(buf), " UP %-8s  %-8s  %-12s", "BND", col_name(j).c_str(),
                          detail::mps_value(model.upper[j]).c_str());
            out << buf << '\n';
        }
    }
    out << "ENDATA\n";
}

inline void write_mps(const LPModel& model, const std::string& path, const std::string& problem_name = "ACTEXLP") {
    std::ofstream out(path);
    if (!out) throw ParseError(ParseError::Kind::Io, 0, 0, "cannot write '" + path + "'");
    write_mps(model, out, problem_name);
}

}  // namespace actex
