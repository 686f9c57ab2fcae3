#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "actex/types.hpp"

namespace actex {

/// Parsed price file: one row per date, one column per asset.
struct PriceTable {
    std::vector<std::string> dates;   // ISO-8601, strictly increasing
    std::vector<std::string> assets;  // column order as in the file header
    Matrix prices;                    // dates x assets
};

/**
 * Discrete uncertainty model: each row is one equally probable joint return
 * outcome for all assets. Entries are simple period returns (0.013 = +1.3%).
 *
 * Immutable after construction; share freely across threads.
 */
struct ScenarioSet {
    std::vector<std::string> assets;
    Matrix returns;  // scenarios x assets
    std::string period_label;

    ScenarioSet(std::vector<std::string> asset_ids, Matrix scenario_returns, std::string period = "")
        : assets(std::move(asset_ids)), returns(std::move(scenario_returns)), period_label(std::move(period)) {
        if (returns.rows < 1 || returns.cols < 1)
            throw DimensionError("scenario set needs at least one scenario and one asset");
        if (assets.size() != returns.cols)
            throw DimensionError("scenario set has " + std::to_string(returns.cols) + " return columns but " +
                                 std::to_string(assets.size()) + " asset identifiers");
        std::unordered_set<std::string> seen;
        for (const auto& a : assets) {
            if (a.empty()) throw ConfigError("empty asset identifier");
            if (!seen.insert(a).second) throw ConfigError("duplicate asset identifier '" + a + "'");
        }
        for (double r : returns.data) {
            if (!std::isfinite(r)) throw ConfigError("non-finite scenario return");
            if (r <= -1.0) throw ConfigError("scenario return <= -100%");
        }
    }

    std::size_t num_scenarios() const { return returns.rows; }
    std::size_t num_assets() const { return returns.cols; }
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            out.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

// YYYY-MM-DD with plausible month/day ranges. Strings of this shape compare
// chronologically as plain strings, which the order checks rely on.
inline bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

inline double parse_cell(const std::string& field, std::size_t row, std::size_t col) {
    if (field.empty())
        throw ParseError(ParseError::Kind::MissingCell, row, col,
                         "missing cell at row " + std::to_string(row) + ", column " + std::to_string(col));
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value))
        throw ParseError(ParseError::Kind::NonNumeric, row, col,
                         "non-numeric value '" + field + "' at row " + std::to_string(row) + ", column " +
                             std::to_string(col));
    return value;
}

struct RawTable {
    std::vector<std::string> labels;
    std::vector<std::string> assets;
    Matrix values;
};

inline RawTable read_table(std::istream& in, char delim, bool dated) {
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(ParseError::Kind::BadHeader, 1, 0, "empty input, expected a header row");
    const auto header = split_fields(line, delim);
    if (header.size() < 2)
        throw ParseError(ParseError::Kind::BadHeader, 1, 0, "header needs a date column and at least one asset");
    RawTable t;
    t.assets.assign(header.begin() + 1, header.end());
    {
        std::unordered_set<std::string> seen;
        for (std::size_t j = 0; j < t.assets.size(); ++j) {
            if (t.assets[j].empty())
                throw ParseError(ParseError::Kind::BadHeader, 1, j + 2, "empty asset identifier in header");
            if (!seen.insert(t.assets[j]).second)
                throw ParseError(ParseError::Kind::BadHeader, 1, j + 2,
                                 "duplicate asset identifier '" + t.assets[j] + "' in header");
        }
    }

    std::vector<double> cells;
    std::size_t row = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        const auto fields = split_fields(line, delim);
        if (fields.size() != header.size())
            throw ParseError(ParseError::Kind::MalformedRow, row, 0,
                             "row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                                 " fields, expected " + std::to_string(header.size()));
        const std::string& label = fields[0];
        if (dated) {
            if (!is_iso_date(label))
                throw ParseError(ParseError::Kind::MalformedRow, row, 1,
                                 "'" + label + "' is not an ISO-8601 date (row " + std::to_string(row) + ")");
            if (!t.labels.empty()) {
                if (label == t.labels.back())
                    throw ParseError(ParseError::Kind::DuplicateDate, row, 1,
                                     "duplicate date '" + label + "' at row " + std::to_string(row));
                if (label < t.labels.back())
                    throw ParseError(ParseError::Kind::OutOfOrderDate, row, 1,
                                     "date '" + label + "' at row " + std::to_string(row) +
                                         " is not after the previous row");
            }
        } else if (label.empty()) {
            throw ParseError(ParseError::Kind::MalformedRow, row, 1,
                             "empty row label at row " + std::to_string(row));
        }
        t.labels.push_back(label);
        for (std::size_t j = 1; j < fields.size(); ++j) cells.push_back(parse_cell(fields[j], row, j + 1));
    }
    t.values.rows = t.labels.size();
    t.values.cols = t.assets.size();
    t.values.data = std::move(cells);
    return t;
}

}  // namespace detail

/**
 * Reads a delimited price table: header of identifiers, first column an
 * ISO-8601 date, remaining columns prices. Dates must strictly increase;
 * a missing or non-numeric cell is an error, never imputed.
 */
inline PriceTable load_prices(std::istream& in, char delim = ',') {
    auto raw = detail::read_table(in, delim, /*dated=*/true);
    if (raw.values.rows < 3)
        throw ParseError(ParseError::Kind::TooFewRows, raw.values.rows + 1, 0,
                         "price table needs at least 3 data rows, got " + std::to_string(raw.values.rows));
    return PriceTable{std::move(raw.labels), std::move(raw.assets), std::move(raw.values)};
}

inline PriceTable load_prices(const std::string& path, char delim = ',') {
    std::ifstream in(path);
    if (!in) throw ParseError(ParseError::Kind::Io, 0, 0, "cannot open price file '" + path + "'");
    return load_prices(in, delim);
}

/**
 * Simple-return scenarios from consecutive prices:
 *   returns[t][j] = prices[t+1][j] / prices[t][j] - 1.
 *
 * Simple (not log) returns keep the portfolio return linear in the weights,
 * which everything downstream depends on.
 */
inline ScenarioSet to_returns(const PriceTable& table, std::string period_label = "") {
    if (table.prices.rows < 3) throw ParseError(ParseError::Kind::TooFewRows, 0, 0, "need at least 3 price rows");
    for (std::size_t t = 0; t < table.prices.rows; ++t) {
        for (std::size_t j = 0; j < table.prices.cols; ++j) {
            if (table.prices(t, j) <= 0.0)
                throw ParseError(ParseError::Kind::NonPositivePrice, t + 2, j + 2,
                                 "non-positive price for '" + table.assets[j] + "' at data row " +
                                     std::to_string(t + 1));
        }
    }
    Matrix r(table.prices.rows - 1, table.prices.cols);
    for (std::size_t t = 0; t + 1 < table.prices.rows; ++t) {
        for (std::size_t j = 0; j < table.prices.cols; ++j) {
            r(t, j) = table.prices(t + 1, j) / table.prices(t, j) - 1.0;
        }
    }
    return ScenarioSet(table.assets, std::move(r), std::move(period_label));
}

/**
 * Reads an already-computed scenario matrix (same layout as a price table
 * but entries are returns; row labels are free-form and only need to be
 * unique). This is the format of the bundled fixture files.
 */
inline ScenarioSet load_scenarios(std::istream& in, char delim = ',', std::string period_label = "") {
    auto raw = detail::read_table(in, delim, /*dated=*/false);
    if (raw.values.rows < 2)
        throw ParseError(ParseError::Kind::TooFewRows, raw.values.rows + 1, 0,
                         "scenario table needs at least 2 rows, got " + std::to_string(raw.values.rows));
    for (std::size_t i = 0; i < raw.values.rows; ++i) {
        for (std::size_t j = 0; j < raw.values.cols; ++j) {
            if (raw.values(i, j) <= -1.0)
                throw ParseError(ParseError::Kind::NonNumeric, i + 2, j + 2,
                                 "return <= -100% at data row " + std::to_string(i + 1));
        }
    }
    return ScenarioSet(std::move(raw.assets), std::move(raw.values), std::move(period_label));
}

inline ScenarioSet load_scenarios(const std::string& path, char delim = ',', std::string period_label = "") {
    std::ifstream in(path);
    if (!in) throw ParseError(ParseError::Kind::Io, 0, 0, "cannot open scenario file '" + path + "'");
    return load_scenarios(in, delim, std::move(period_label));
}

/// Loss distribution of portfolio x: values[i] = sum_j x[j] * returns[i][j].
inline LossDistribution evaluate(const Portfolio& x, const ScenarioSet& scen) {
    if (x.size() != scen.num_assets())
        throw DimensionError("portfolio has " + std::to_string(x.size()) + " weights, scenario set has " +
                             std::to_string(scen.num_assets()) + " assets");
    LossDistribution loss(scen.num_scenarios(), 0.0);
    for (std::size_t i = 0; i < scen.num_scenarios(); ++i) {
        const auto row = scen.returns.row(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) acc += x[j] * row[j];
        loss[i] = acc;
    }
    return loss;
}

}  // namespace actex
