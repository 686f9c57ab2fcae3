#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace actex {

/// Dense vector of doubles, the working currency of the whole library.
using Vec = std::vector<double>;

/// Portfolio weights as signed fractions of budget. Entry j belongs to the
/// long side when positive and to the short side when negative; an exact
/// zero means the asset is not held.
using Portfolio = Vec;

/// Per-scenario portfolio returns (one entry per scenario row).
using LossDistribution = Vec;

// ---------------------------------------------------------------------------
// Error taxonomy

class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mismatched vector/matrix sizes between values that must agree.
class DimensionError : public Error {
  public:
    using Error::Error;
};

/// Invalid configuration value; the message names the offending field.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Tabular input rejected. Positions are 1-based and count the header as
/// row 1; column 1 is the date/label column. A position of 0 means the
/// coordinate does not apply.
class ParseError : public Error {
  public:
    enum class Kind {
        Io,
        BadHeader,
        MalformedRow,
        DuplicateDate,
        OutOfOrderDate,
        NonNumeric,
        MissingCell,
        NonPositivePrice,
        TooFewRows,
    };

    ParseError(Kind kind, std::size_t row, std::size_t col, const std::string& msg)
        : Error(msg), kind_(kind), row_(row), col_(col) {}

    Kind kind() const { return kind_; }
    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

  private:
    Kind kind_;
    std::size_t row_;
    std::size_t col_;
};

/// normalize() could not reach the requested side sums.
class NormalizeError : public Error {
  public:
    enum class Kind { EmptySide, NonConvergent };

    NormalizeError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

/// Sampling gave up (no feasible support found within the retry budget).
class SamplingError : public Error {
  public:
    using Error::Error;
};

/// A local-search stage exceeded its iteration cap.
class SearchError : public Error {
  public:
    using Error::Error;
};

/// Grid enumeration would exceed the candidate budget.
class EnumerationError : public Error {
  public:
    using Error::Error;
};

/// Convex solver failed in a way the caller cannot act on (internal).
class SolverError : public Error {
  public:
    using Error::Error;
};

// ---------------------------------------------------------------------------

/// Dense row-major matrix. Sized once, then indexed; no algebra beyond what
/// the callers spell out themselves.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

inline bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace actex
