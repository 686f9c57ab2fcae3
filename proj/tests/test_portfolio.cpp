#include <cmath>
#include <cstdlib>
#include <sstream>

#include "test_support.hpp"

using namespace actex;
using Catch::Approx;

TEST_CASE("constraint presets carry the documented defaults") {
    const ConstraintSet ae = ConstraintSet::active_extension(30);
    REQUIRE(ae.long_sum == 1.30);
    REQUIRE(ae.short_sum == -0.30);
    REQUIRE(ae.lower[7] == -0.1);
    REQUIRE(ae.upper[7] == 0.5);
    REQUIRE(ae.long_frac == 0.3);
    REQUIRE(ae.short_frac == 0.1);
    REQUIRE_NOTHROW(ae.validate());
    REQUIRE(ae.long_sum + ae.short_sum == Approx(1.0));  // net exposure

    const ConstraintSet lo = ConstraintSet::long_only(10);
    REQUIRE(lo.long_sum == 1.0);
    REQUIRE(lo.short_sum == 0.0);
    REQUIRE(lo.short_frac == 0.0);
    REQUIRE_NOTHROW(lo.validate());
}

TEST_CASE("constraint validation rejects inconsistent sets") {
    ConstraintSet c = ConstraintSet::active_extension(4);
    SECTION("bounds must straddle zero") {
        c.lower[0] = 0.1;
        REQUIRE_THROWS_AS(c.validate(), ConfigError);
    }
    SECTION("upper bounds must be able to carry the long budget") {
        c.upper.assign(4, 0.2);  // sums to 0.8 < 1.3
        REQUIRE_THROWS_AS(c.validate(), ConfigError);
    }
    SECTION("lower bounds must be able to carry the short budget") {
        c.lower.assign(4, -0.05);  // sums to -0.2 > -0.3
        REQUIRE_THROWS_AS(c.validate(), ConfigError);
    }
    SECTION("support fractions bounded") {
        c.long_frac = 0.8;
        c.short_frac = 0.3;
        REQUIRE_THROWS_AS(c.validate(), ConfigError);
    }
    SECTION("long_sum must be positive") {
        c.long_sum = 0.0;
        REQUIRE_THROWS_AS(c.validate(), ConfigError);
    }
}

TEST_CASE("is_feasible checks bounds, side sums and the return floor") {
    ConstraintSet c = ConstraintSet::active_extension(3);
    const Portfolio good{0.5, 0.5, 0.3};  // long 1.3 but short side empty -> short sum 0 != -0.3
    const auto miss_short = is_feasible(good, c);
    REQUIRE_FALSE(miss_short.feasible);
    REQUIRE(miss_short.violations.size() == 1);
    REQUIRE(miss_short.violations[0].kind == ViolationKind::ShortSum);
    REQUIRE(miss_short.violations[0].magnitude == Approx(0.3));

    const Portfolio ok{0.5, 0.8 - 1e-12, -0.3};
    c.upper[1] = 0.8;
    c.lower[2] = -0.3;  // one asset carries the whole short side
    REQUIRE(static_cast<bool>(is_feasible(ok, c)));

    const auto over = is_feasible({0.9, 0.4, -0.3}, c);
    REQUIRE_FALSE(over.feasible);
    REQUIRE(over.violations[0].kind == ViolationKind::UpperBound);
    REQUIRE(over.violations[0].asset == 0);
    REQUIRE(over.violations[0].magnitude == Approx(0.4));

    const auto under = is_feasible({0.5, 0.8, -0.5}, c);
    REQUIRE_FALSE(under.feasible);
    REQUIRE(under.violations[0].kind == ViolationKind::LowerBound);

    REQUIRE_THROWS_AS(is_feasible({1.0}, c), DimensionError);
}

TEST_CASE("return floor checked only with scenarios present") {
    ConstraintSet c = ConstraintSet::long_only(2);
    c.mu = 0.05;
    const ScenarioSet s = testutil::make_scen({{0.01, 0.02}, {0.03, 0.00}});
    const Portfolio x{0.5, 0.5};
    REQUIRE(static_cast<bool>(is_feasible(x, c)));  // no scenarios, floor not evaluated
    const auto with = is_feasible(x, c, &s);
    REQUIRE_FALSE(with.feasible);
    REQUIRE(with.violations[0].kind == ViolationKind::ReturnFloor);
    c.mu = 0.01;
    REQUIRE(static_cast<bool>(is_feasible(x, c, &s)));
}

TEST_CASE("normalize rescales both sides to their budgets") {
    const ConstraintSet c = ConstraintSet::active_extension(6);
    const Portfolio x{0.6, 0.2, 0.15, -0.05, -0.1, -0.15};
    const Portfolio n = normalize(x, c);
    double pos = 0.0, neg = 0.0;
    for (double v : n) (v > 0.0 ? pos : neg) += v;
    REQUIRE(pos == Approx(1.30).margin(1e-9));
    REQUIRE(neg == Approx(-0.30).margin(1e-9));
    // First long entry clips at 0.5; the other two split the residual 0.8
    // in their original 4:3 proportion.
    REQUIRE(n[0] == Approx(0.5).margin(1e-9));
    REQUIRE(n[1] == Approx(16.0 / 35.0).margin(1e-9));
    REQUIRE(n[2] == Approx(12.0 / 35.0).margin(1e-9));
    // Short side can only reach -0.3 with every entry at its bound.
    REQUIRE(n[3] == Approx(-0.1).margin(1e-9));
    REQUIRE(n[4] == Approx(-0.1).margin(1e-9));
    REQUIRE(n[5] == Approx(-0.1).margin(1e-9));
}

TEST_CASE("normalize clips at bounds and redistributes the residual") {
    ConstraintSet c = ConstraintSet::long_only(3, 0.5);
    c.long_sum = 1.3;
    // scale alone would put the first weight far above the cap
    const Portfolio n = normalize({1.0, 0.2, 0.1}, c);
    REQUIRE(n[0] == Approx(0.5).margin(1e-9));
    REQUIRE(n[1] == Approx(0.5).margin(1e-9));  // redistribution pushes it into the cap too
    REQUIRE(n[2] == Approx(0.3).margin(1e-9));
}

TEST_CASE("normalize rejects impossible side budgets") {
    ConstraintSet c = ConstraintSet::long_only(2, 0.5);
    c.long_sum = 1.3;  // two caps of 0.5 cannot carry 1.3
    try {
        normalize({0.9, 0.1}, c);
        FAIL("expected NormalizeError");
    } catch (const NormalizeError& e) {
        REQUIRE(e.kind() == NormalizeError::Kind::NonConvergent);
    }
}

TEST_CASE("normalize flags an empty side") {
    const ConstraintSet c = ConstraintSet::active_extension(3);
    try {
        normalize({0.5, 0.5, 0.3}, c);  // nothing negative to scale to -0.3
        FAIL("expected NormalizeError");
    } catch (const NormalizeError& e) {
        REQUIRE(e.kind() == NormalizeError::Kind::EmptySide);
    }
}

TEST_CASE("a zero short budget clears stray negative entries") {
    ConstraintSet c = ConstraintSet::long_only(3);
    const Portfolio n = normalize({0.5, 0.6, -0.2}, c);
    REQUIRE(n[2] == 0.0);
    REQUIRE(!std::signbit(n[2]));  // exactly +0.0, serialization prints "0"
    REQUIRE(n[0] + n[1] == Approx(1.0).margin(1e-9));
}

TEST_CASE("normalize preserves the sign pattern and is idempotent") {
    const ConstraintSet c = ConstraintSet::active_extension(12);
    rng::SplitMix64 g(17);
    for (int trial = 0; trial < 500; ++trial) {
        Portfolio x(12, 0.0);
        for (std::size_t j = 0; j < 12; ++j) {
            const double u = g.uniform01();
            if (u < 0.4) x[j] = g.uniform01();           // long candidate
            else if (u < 0.6) x[j] = -g.uniform01() * 0.3;  // short candidate
        }
        Portfolio n;
        try {
            n = normalize(x, c);
        } catch (const NormalizeError&) {
            continue;  // e.g. no negative entries drawn this round
        }
        for (std::size_t j = 0; j < 12; ++j) {
            if (x[j] == 0.0) REQUIRE(n[j] == 0.0);
            if (x[j] > 0.0) REQUIRE(n[j] >= 0.0);
            if (x[j] < 0.0) REQUIRE(n[j] <= 0.0);
            REQUIRE(n[j] <= c.upper[j] + 1e-12);
            REQUIRE(n[j] >= c.lower[j] - 1e-12);
        }
        const Portfolio again = normalize(n, c);
        REQUIRE(testutil::max_abs_diff(n, again) <= 1e-9);
    }
}

TEST_CASE("mean_portfolio averages elementwise") {
    const Portfolio m = mean_portfolio({{0.4, 0.6}, {0.8, 0.2}});
    REQUIRE(m[0] == Approx(0.6));
    REQUIRE(m[1] == Approx(0.4));
    REQUIRE_THROWS_AS(mean_portfolio({}), DimensionError);
    REQUIRE_THROWS_AS(mean_portfolio({{0.1}, {0.1, 0.2}}), DimensionError);
}

TEST_CASE("format_double writes the shortest round-trip decimal") {
    REQUIRE(format_double(0.1) == "0.1");
    REQUIRE(format_double(0.0) == "0");
    REQUIRE(format_double(-0.25) == "-0.25");
    rng::SplitMix64 g(23);
    for (int i = 0; i < 2000; ++i) {
        const double v = (g.uniform01() - 0.5) * std::pow(10.0, static_cast<double>(g.below(7)) - 3.0);
        const std::string text = format_double(v);
        REQUIRE(std::strtod(text.c_str(), nullptr) == v);
    }
}

TEST_CASE("portfolio files round-trip losslessly") {
    const std::vector<std::string> assets{"AA", "BB", "CC"};
    const Portfolio x{0.5, -0.1, 0.9};
    std::ostringstream out;
    write_portfolio(out, assets, x);
    std::istringstream in(out.str());
    const auto rows = read_portfolio(in);
    REQUIRE(rows.size() == 3);
    const Portfolio back = align_portfolio(rows, assets);
    for (std::size_t j = 0; j < 3; ++j) REQUIRE(back[j] == x[j]);  // exact, not approximate
}

TEST_CASE("align_portfolio fills gaps with zero and rejects unknown names") {
    const std::vector<std::string> assets{"AA", "BB", "CC"};
    const Portfolio x = align_portfolio({{"CC", 0.3}, {"AA", 0.7}}, assets);
    REQUIRE(x[0] == 0.7);
    REQUIRE(x[1] == 0.0);
    REQUIRE(x[2] == 0.3);
    REQUIRE_THROWS_AS(align_portfolio({{"ZZ", 1.0}}, assets), ConfigError);
}

TEST_CASE("portfolio reader validates shape") {
    {
        std::istringstream in("");
        REQUIRE_THROWS_AS(read_portfolio(in), ParseError);
    }
    {
        std::istringstream in("asset,weight\nAA,0.5,extra\n");
        REQUIRE_THROWS_AS(read_portfolio(in), ParseError);
    }
    {
        std::istringstream in("asset,weight\nAA,abc\n");
        REQUIRE_THROWS_AS(read_portfolio(in), ParseError);
    }
}
