// Command-line front end: configuration, experiment orchestration, and
// emission of allocation tables, solve reports, and plot-ready data.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "actex/actex.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
    std::string data_path;
    std::string data_kind = "returns";  // or "prices"
    char delimiter = ',';

    actex::RiskSpec risk{actex::RiskKind::Variance, 0.95};

    std::string preset = "long_only";  // or "active_extension"
    std::optional<double> lower, upper, long_sum, short_sum, long_frac, short_frac;
    std::optional<double> mu;

    std::size_t n1 = 10000;
    std::vector<double> epsilons{0.05, 0.01, 0.001};
    std::size_t n2 = 10;
    std::size_t max_iters_per_stage = 10000;
    double penalty_weight = 1e4;

    bool baseline = true;
    std::vector<double> alphas{0.95};
    std::vector<double> mu_grid;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

actex::RiskKind parse_risk_kind(const std::string& name) {
    if (name == "variance") return actex::RiskKind::Variance;
    if (name == "stddev") return actex::RiskKind::StdDev;
    if (name == "mad") return actex::RiskKind::MAD;
    if (name == "var") return actex::RiskKind::VaR;
    if (name == "cvar") return actex::RiskKind::CVaR;
    throw actex::ConfigError("unknown risk kind '" + name + "' (expected variance|stddev|mad|var|cvar)");
}

void expect_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : allowed) {
            if (item.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw actex::ConfigError("unknown config key '" + where + item.key() + "'");
    }
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw actex::ConfigError("config key '" + where + "' must be a number");
    return v.get<double>();
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw actex::ConfigError("cannot open config file '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw actex::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!root.is_object()) throw actex::ConfigError("config root must be an object");
    expect_keys(root,
                {"data", "format", "risk", "constraints", "sampler", "search", "baseline", "alphas", "mu_grid",
                 "out", "seed", "threads"},
                "");

    ExperimentConfig cfg;
    if (root.contains("data")) cfg.data_path = root["data"].get<std::string>();
    if (root.contains("format")) {
        const json& f = root["format"];
        expect_keys(f, {"kind", "delimiter"}, "format.");
        if (f.contains("kind")) {
            cfg.data_kind = f["kind"].get<std::string>();
            if (cfg.data_kind != "returns" && cfg.data_kind != "prices")
                throw actex::ConfigError("format.kind must be 'returns' or 'prices'");
        }
        if (f.contains("delimiter")) {
            const std::string d = f["delimiter"].get<std::string>();
            if (d.size() != 1) throw actex::ConfigError("format.delimiter must be a single character");
            cfg.delimiter = d[0];
        }
    }
    if (root.contains("risk")) {
        const json& r = root["risk"];
        expect_keys(r, {"kind", "alpha"}, "risk.");
        if (r.contains("kind")) cfg.risk.kind = parse_risk_kind(r["kind"].get<std::string>());
        if (r.contains("alpha")) cfg.risk.alpha = as_number(r["alpha"], "risk.alpha");
    }
    if (root.contains("constraints")) {
        const json& c = root["constraints"];
        expect_keys(c, {"preset", "lower", "upper", "long_sum", "short_sum", "long_frac", "short_frac", "mu"},
                    "constraints.");
        if (c.contains("preset")) {
            cfg.preset = c["preset"].get<std::string>();
            if (cfg.preset != "long_only" && cfg.preset != "active_extension")
                throw actex::ConfigError("constraints.preset must be 'long_only' or 'active_extension'");
        }
        auto opt_num = [&](const char* key) -> std::optional<double> {
            if (!c.contains(key) || c[key].is_null()) return std::nullopt;
            return as_number(c[key], std::string("constraints.") + key);
        };
        cfg.lower = opt_num("lower");
        cfg.upper = opt_num("upper");
        cfg.long_sum = opt_num("long_sum");
        cfg.short_sum = opt_num("short_sum");
        cfg.long_frac = opt_num("long_frac");
        cfg.short_frac = opt_num("short_frac");
        cfg.mu = opt_num("mu");
    }
    if (root.contains("sampler")) {
        const json& s = root["sampler"];
        expect_keys(s, {"n1"}, "sampler.");
        if (s.contains("n1")) cfg.n1 = s["n1"].get<std::size_t>();
    }
    if (root.contains("search")) {
        const json& s = root["search"];
        expect_keys(s, {"epsilons", "n2", "max_iters_per_stage", "penalty_weight"}, "search.");
        if (s.contains("epsilons")) cfg.epsilons = s["epsilons"].get<std::vector<double>>();
        if (s.contains("n2")) cfg.n2 = s["n2"].get<std::size_t>();
        if (s.contains("max_iters_per_stage")) cfg.max_iters_per_stage = s["max_iters_per_stage"].get<std::size_t>();
        if (s.contains("penalty_weight")) cfg.penalty_weight = as_number(s["penalty_weight"], "search.penalty_weight");
    }
    if (root.contains("baseline")) cfg.baseline = root["baseline"].get<bool>();
    if (root.contains("alphas")) cfg.alphas = root["alphas"].get<std::vector<double>>();
    if (root.contains("mu_grid")) cfg.mu_grid = root["mu_grid"].get<std::vector<double>>();
    if (root.contains("out")) cfg.out_dir = root["out"].get<std::string>();
    if (root.contains("seed") && !root["seed"].is_null()) cfg.seed = root["seed"].get<std::uint64_t>();
    if (root.contains("threads")) cfg.threads = root["threads"].get<unsigned>();
    return cfg;
}

/// Command-line values that override the config file.
struct FlagOverrides {
    std::string config_path;
    std::string data_path;
    std::string risk_name;
    std::optional<double> alpha;
    std::vector<double> mu;  // scalar floor for optimize/compare, grid for frontier
    std::string baseline;    // "on" / "off"
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

ExperimentConfig resolve_config(const FlagOverrides& f, bool mu_is_grid) {
    ExperimentConfig cfg = f.config_path.empty() ? ExperimentConfig{} : load_config_file(f.config_path);
    if (!f.data_path.empty()) cfg.data_path = f.data_path;
    if (!f.risk_name.empty()) cfg.risk.kind = parse_risk_kind(f.risk_name);
    if (f.alpha) cfg.risk.alpha = *f.alpha;
    if (!f.mu.empty()) {
        if (mu_is_grid)
            cfg.mu_grid = f.mu;
        else
            cfg.mu = f.mu.back();
    }
    if (!f.baseline.empty()) {
        if (f.baseline != "on" && f.baseline != "off") throw actex::ConfigError("--baseline expects 'on' or 'off'");
        cfg.baseline = f.baseline == "on";
    }
    if (!f.out_dir.empty()) cfg.out_dir = f.out_dir;
    if (f.seed) cfg.seed = f.seed;
    if (f.threads) cfg.threads = *f.threads;
    if (cfg.data_path.empty()) throw actex::ConfigError("no data file given (use --data or the 'data' config key)");
    for (double a : cfg.alphas) actex::RiskSpec{actex::RiskKind::CVaR, a}.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Resolved run pieces shared by the commands

struct Workspace {
    ExperimentConfig cfg;
    actex::ScenarioSet scen;
    actex::ConstraintSet constraints;
    std::uint64_t seed = 0;
    bool seed_was_drawn = false;
};

actex::ScenarioSet load_data(const ExperimentConfig& cfg) {
    if (cfg.data_kind == "prices") {
        const actex::PriceTable table = actex::load_prices(cfg.data_path, cfg.delimiter);
        return actex::to_returns(table);
    }
    return actex::load_scenarios(cfg.data_path, cfg.delimiter);
}

actex::ConstraintSet build_constraints(const ExperimentConfig& cfg, std::size_t assets) {
    actex::ConstraintSet c = cfg.preset == "active_extension" ? actex::ConstraintSet::active_extension(assets)
                                                              : actex::ConstraintSet::long_only(assets);
    if (cfg.lower) std::fill(c.lower.begin(), c.lower.end(), *cfg.lower);
    if (cfg.upper) std::fill(c.upper.begin(), c.upper.end(), *cfg.upper);
    if (cfg.long_sum) c.long_sum = *cfg.long_sum;
    if (cfg.short_sum) c.short_sum = *cfg.short_sum;
    if (cfg.long_frac) c.long_frac = *cfg.long_frac;
    if (cfg.short_frac) c.short_frac = *cfg.short_frac;
    c.mu = cfg.mu;
    c.validate();
    return c;
}

Workspace open_workspace(const FlagOverrides& flags, bool mu_is_grid = false) {
    ExperimentConfig cfg = resolve_config(flags, mu_is_grid);
    cfg.risk.validate();
    actex::ScenarioSet scen = load_data(cfg);
    actex::ConstraintSet constraints = build_constraints(cfg, scen.num_assets());
    std::uint64_t seed = 0;
    bool drawn = false;
    if (cfg.seed) {
        seed = *cfg.seed;
    } else {
        std::random_device rd;
        seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        drawn = true;
    }
    return Workspace{std::move(cfg), std::move(scen), std::move(constraints), seed, drawn};
}

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw actex::ConfigError("cannot create output directory '" + dir + "': " + ec.message());
}

// ---------------------------------------------------------------------------
// Reporting helpers

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Canonical JSON snapshot of everything that determines the run.
json resolved_config_json(const Workspace& ws) {
    const ExperimentConfig& cfg = ws.cfg;
    json j;
    j["data"] = cfg.data_path;
    j["format"] = {{"kind", cfg.data_kind}, {"delimiter", std::string(1, cfg.delimiter)}};
    j["risk"] = {{"kind", actex::risk_kind_name(cfg.risk.kind)}, {"alpha", cfg.risk.alpha}};
    json c;
    c["preset"] = cfg.preset;
    c["long_sum"] = ws.constraints.long_sum;
    c["short_sum"] = ws.constraints.short_sum;
    c["lower"] = ws.constraints.lower.empty() ? 0.0 : ws.constraints.lower[0];
    c["upper"] = ws.constraints.upper.empty() ? 0.0 : ws.constraints.upper[0];
    c["long_frac"] = ws.constraints.long_frac;
    c["short_frac"] = ws.constraints.short_frac;
    if (cfg.mu) c["mu"] = *cfg.mu;
    j["constraints"] = c;
    j["sampler"] = {{"n1", cfg.n1}};
    j["search"] = {{"epsilons", cfg.epsilons},
                   {"n2", cfg.n2},
                   {"max_iters_per_stage", cfg.max_iters_per_stage},
                   {"penalty_weight", cfg.penalty_weight}};
    j["baseline"] = cfg.baseline;
    j["alphas"] = cfg.alphas;
    if (!cfg.mu_grid.empty()) j["mu_grid"] = cfg.mu_grid;
    j["seed"] = ws.seed;
    j["threads"] = cfg.threads;
    return j;
}

json report_header(const Workspace& ws, const char* command) {
    json j;
    j["artifact"] = {{"name", "actex"}, {"version", actex::kVersion}};
    j["command"] = command;
    j["seed"] = ws.seed;
    j["threads"] = ws.cfg.threads;
    j["config_hash"] = hex64(fnv1a64(resolved_config_json(ws).dump()));
    j["data"] = {{"path", ws.cfg.data_path},
                 {"assets", ws.scen.num_assets()},
                 {"scenarios", ws.scen.num_scenarios()}};
    j["risk"] = {{"kind", actex::risk_kind_name(ws.cfg.risk.kind)}, {"alpha", ws.cfg.risk.alpha}};
    return j;
}

void write_json_file(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw actex::ConfigError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

bool plain_output() {
    if (std::getenv("NO_COLOR") != nullptr || std::getenv("ACTEX_PLAIN") != nullptr) return true;
    return isatty(fileno(stdout)) == 0;
}

const char* bold_on() { return plain_output() ? "" : "\033[1m"; }
const char* bold_off() { return plain_output() ? "" : "\033[0m"; }

// ---------------------------------------------------------------------------
// Heuristic + baseline plumbing

actex::SolveReport run_heuristic(const Workspace& ws) {
    actex::SamplerConfig scfg;
    scfg.constraints = ws.constraints;
    scfg.n1 = ws.cfg.n1;
    scfg.rng_seed = ws.seed;
    actex::SearchConfig search;
    search.epsilons = ws.cfg.epsilons;
    search.n2 = ws.cfg.n2;
    search.max_iters_per_stage = ws.cfg.max_iters_per_stage;
    search.risk = ws.cfg.risk;
    search.mu_mode = actex::MuMode::Penalty;
    search.penalty_weight = ws.cfg.penalty_weight;
    return actex::multi_start(ws.scen, ws.constraints, scfg, search, ws.cfg.threads);
}

bool baseline_available(const Workspace& ws) {
    if (ws.cfg.risk.kind == actex::RiskKind::CVaR) return true;
    return ws.cfg.risk.kind == actex::RiskKind::Variance && ws.constraints.short_sum == 0.0;
}

const char* baseline_kind_name(const Workspace& ws) {
    return ws.cfg.risk.kind == actex::RiskKind::CVaR ? "cvar_lp" : "variance_qp";
}

actex::BaselineSolution run_baseline(const Workspace& ws) {
    if (ws.cfg.risk.kind == actex::RiskKind::CVaR)
        return actex::solve_cvar_lp(ws.scen, ws.constraints, ws.cfg.risk.alpha, ws.cfg.mu);
    actex::ConstraintSet c = ws.constraints;  // floor handled inside the QP via c.mu
    return actex::solve_markowitz_long_only(ws.scen, c);
}

double relative_gap(double heuristic, double reference) {
    const double denom = std::max(std::abs(reference), 1e-300);
    return std::abs(heuristic - reference) / denom;
}

void log_seed(const Workspace& ws) {
    if (ws.seed_was_drawn) std::cout << "seed: " << ws.seed << " (drawn; pass --seed to reproduce)\n";
}

// ---------------------------------------------------------------------------
// Commands

int cmd_optimize(const FlagOverrides& flags) {
    Workspace ws = open_workspace(flags);
    ensure_out_dir(ws.cfg.out_dir);
    log_seed(ws);

    const auto t0 = std::chrono::steady_clock::now();
    const actex::SolveReport rep = run_heuristic(ws);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const fs::path out(ws.cfg.out_dir);
    actex::write_portfolio((out / "solution.csv").string(), ws.scen.assets, rep.best);

    json j = report_header(ws, "optimize");
    j["solve"] = {{"objective", rep.objective_value},
                  {"iters_per_stage", rep.iters_per_stage},
                  {"total_evaluations", rep.total_evaluations},
                  {"starts", rep.starts.size()},
                  {"averaged_restart_used", rep.averaged_restart_used},
                  {"wall_time_seconds", wall}};

    bool have_baseline = false;
    actex::BaselineSolution base;
    if (ws.cfg.baseline && baseline_available(ws)) {
        base = run_baseline(ws);
        have_baseline = base.status == actex::BaselineStatus::Optimal;
        json b;
        b["kind"] = baseline_kind_name(ws);
        b["status"] = actex::baseline_status_name(base.status);
        if (have_baseline) {
            b["objective"] = base.objective;
            b["relative_gap"] = relative_gap(rep.objective_value, base.objective);
        }
        j["baseline"] = b;
    } else {
        j["baseline"] = nullptr;
    }
    write_json_file(j, out / "report.json");

    {
        std::ofstream plot(out / "plotdata.csv");
        if (!plot) throw actex::ConfigError("cannot write '" + (out / "plotdata.csv").string() + "'");
        plot << (have_baseline ? "asset,heuristic,baseline\n" : "asset,heuristic\n");
        for (std::size_t jx = 0; jx < ws.scen.num_assets(); ++jx) {
            plot << ws.scen.assets[jx] << ',' << actex::format_double(rep.best[jx]);
            if (have_baseline) plot << ',' << actex::format_double(base.x[jx]);
            plot << '\n';
        }
    }

    std::cout << "objective (" << actex::risk_kind_name(ws.cfg.risk.kind) << "): "
              << actex::format_double(rep.objective_value) << '\n';
    if (have_baseline)
        std::cout << "baseline  (" << baseline_kind_name(ws) << "): " << actex::format_double(base.objective)
                  << "  relative gap: " << actex::format_double(relative_gap(rep.objective_value, base.objective))
                  << '\n';
    std::cout << "artifacts written to " << out.string() << '\n';
    return 0;
}

int cmd_compare(const FlagOverrides& flags) {
    Workspace ws = open_workspace(flags);
    if (ws.cfg.risk.kind == actex::RiskKind::VaR) throw actex::ConfigError("no convex baseline for VaR");
    if (ws.cfg.risk.kind == actex::RiskKind::StdDev || ws.cfg.risk.kind == actex::RiskKind::MAD)
        throw actex::ConfigError(std::string("no convex baseline for ") +
                                 actex::risk_kind_name(ws.cfg.risk.kind));
    if (ws.cfg.risk.kind == actex::RiskKind::Variance && ws.constraints.short_sum != 0.0)
        throw actex::ConfigError("variance baseline requires long-only constraints (short budget must be 0)");
    ensure_out_dir(ws.cfg.out_dir);
    log_seed(ws);

    const actex::SolveReport rep = run_heuristic(ws);
    const actex::BaselineSolution base = run_baseline(ws);
    if (base.status != actex::BaselineStatus::Optimal)
        throw actex::SolverError(std::string("baseline solve failed: ") + actex::baseline_status_name(base.status));

    // Per-asset context columns: sample deviation and signed quantile of
    // each asset's own return column at the configured level.
    const std::size_t a = ws.scen.num_assets();
    const double alpha = ws.cfg.risk.alpha;
    std::vector<double> col_sd(a), col_var(a);
    {
        actex::Vec col(ws.scen.num_scenarios());
        for (std::size_t jx = 0; jx < a; ++jx) {
            for (std::size_t i = 0; i < ws.scen.num_scenarios(); ++i) col[i] = ws.scen.returns(i, jx);
            col_sd[jx] = actex::std_dev(col);
            col_var[jx] = actex::var_quantile(col, alpha);
        }
    }

    const double gap = relative_gap(rep.objective_value, base.objective);
    char alpha_pct[16];
    std::snprintf(alpha_pct, sizeof(alpha_pct), "%g", alpha * 100.0);

    std::printf("%s%-8s %12s %12s %14s %14s%s\n", bold_on(), "Asset", "Std.Dev.",
                (std::string("VaR (") + alpha_pct + "%)").c_str(), "Baseline", "Heuristic", bold_off());
    const fs::path out(ws.cfg.out_dir);
    std::ofstream csv(out / "compare.csv");
    if (!csv) throw actex::ConfigError("cannot write '" + (out / "compare.csv").string() + "'");
    csv << "asset,std_dev,var_quantile,baseline_weight,heuristic_weight\n";
    for (std::size_t jx = 0; jx < a; ++jx) {
        const bool shown = std::abs(rep.best[jx]) > 1e-12 || std::abs(base.x[jx]) > 1e-12;
        if (!shown) continue;
        std::printf("%-8s %12.6f %12.6f %14.6f %14.6f\n", ws.scen.assets[jx].c_str(), col_sd[jx], col_var[jx],
                    base.x[jx], rep.best[jx]);
        csv << ws.scen.assets[jx] << ',' << actex::format_double(col_sd[jx]) << ','
            << actex::format_double(col_var[jx]) << ',' << actex::format_double(base.x[jx]) << ','
            << actex::format_double(rep.best[jx]) << '\n';
    }
    std::printf("%-8s %12s %12s %14.8f %14.8f\n", "objective", "", "", base.objective, rep.objective_value);
    std::printf("relative gap: %.4f%%\n", gap * 100.0);
    csv << "objective,,," << actex::format_double(base.objective) << ',' << actex::format_double(rep.objective_value)
        << '\n';
    csv << "relative_gap,,,," << actex::format_double(gap) << '\n';

    json j = report_header(ws, "compare");
    j["solve"] = {{"objective", rep.objective_value},
                  {"iters_per_stage", rep.iters_per_stage},
                  {"averaged_restart_used", rep.averaged_restart_used}};
    j["baseline"] = {{"kind", baseline_kind_name(ws)},
                     {"status", actex::baseline_status_name(base.status)},
                     {"objective", base.objective},
                     {"relative_gap", gap}};
    write_json_file(j, out / "report.json");
    return 0;
}

int cmd_frontier(const FlagOverrides& flags) {
    Workspace ws = open_workspace(flags, /*mu_is_grid=*/true);
    std::vector<double> grid = ws.cfg.mu_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() < 2)
        throw actex::ConfigError("return-floor grid needs >= 2 distinct values (repeat --mu or set mu_grid)");
    ensure_out_dir(ws.cfg.out_dir);
    log_seed(ws);

    const bool use_baseline = ws.cfg.baseline && baseline_available(ws);
    if (ws.cfg.baseline && !use_baseline)
        std::cerr << "note: no convex baseline for " << actex::risk_kind_name(ws.cfg.risk.kind)
                  << "; sweeping the heuristic instead\n";
    const actex::Vec means = actex::mean_returns(ws.scen);

    const fs::path out(ws.cfg.out_dir);
    std::ofstream csv(out / "frontier.csv");
    if (!csv) throw actex::ConfigError("cannot write '" + (out / "frontier.csv").string() + "'");
    csv << "mu,return,risk,feasible\n";
    std::printf("%s%12s %12s %12s %9s%s\n", bold_on(), "mu", "return", "risk", "feasible", bold_off());

    json rows = json::array();
    for (double mu : grid) {
        Workspace point = ws;  // per-point copy carries the floor
        point.cfg.mu = mu;
        point.constraints.mu = mu;
        bool feasible = false;
        double ret = 0.0, risk_value = 0.0;
        if (use_baseline) {
            const actex::BaselineSolution b = run_baseline(point);
            if (b.status == actex::BaselineStatus::Optimal) {
                feasible = true;
                risk_value = b.objective;
                for (std::size_t jx = 0; jx < means.size(); ++jx) ret += means[jx] * b.x[jx];
            }
        } else {
            const actex::SolveReport rep = run_heuristic(point);
            const actex::LossDistribution loss = actex::evaluate(rep.best, point.scen);
            ret = actex::expected_return(loss);
            risk_value = actex::risk(loss, point.cfg.risk);
            feasible = ret >= mu - 1e-6;
        }
        if (feasible) {
            csv << actex::format_double(mu) << ',' << actex::format_double(ret) << ','
                << actex::format_double(risk_value) << ",1\n";
            std::printf("%12.6f %12.6f %12.8f %9s\n", mu, ret, risk_value, "yes");
        } else {
            csv << actex::format_double(mu) << ",,,0\n";
            std::printf("%12.6f %12s %12s %9s\n", mu, "-", "-", "no");
        }
        rows.push_back({{"mu", mu}, {"return", feasible ? json(ret) : json(nullptr)},
                        {"risk", feasible ? json(risk_value) : json(nullptr)}, {"feasible", feasible}});
    }

    json j = report_header(ws, "frontier");
    j["frontier"] = rows;
    j["baseline_sweep"] = use_baseline;
    write_json_file(j, out / "report.json");
    return 0;
}

int cmd_sample(const FlagOverrides& flags, std::size_t count) {
    Workspace ws = open_workspace(flags);
    ensure_out_dir(ws.cfg.out_dir);
    log_seed(ws);

    actex::SamplerConfig scfg;
    scfg.constraints = ws.constraints;
    scfg.n1 = count;
    scfg.rng_seed = ws.seed;
    scfg.validate();

    const fs::path path = fs::path(ws.cfg.out_dir) / "samples.csv";
    std::ofstream outf(path);
    if (!outf) throw actex::ConfigError("cannot write '" + path.string() + "'");
    for (std::size_t jx = 0; jx < ws.scen.num_assets(); ++jx)
        outf << (jx ? "," : "") << ws.scen.assets[jx];
    outf << '\n';
    for (std::size_t i = 0; i < count; ++i) {
        actex::rng::SplitMix64 stream = actex::rng::substream(ws.seed, i);
        const actex::Portfolio x = actex::sample_portfolio(scfg, stream);
        for (std::size_t jx = 0; jx < x.size(); ++jx) outf << (jx ? "," : "") << actex::format_double(x[jx]);
        outf << '\n';
    }
    std::cout << "wrote " << count << " samples to " << path.string() << '\n';
    return 0;
}

int cmd_report(const FlagOverrides& flags, const std::string& portfolio_path) {
    Workspace ws = open_workspace(flags);
    ensure_out_dir(ws.cfg.out_dir);

    const auto rows = actex::read_portfolio(portfolio_path);
    const actex::Portfolio x = actex::align_portfolio(rows, ws.scen.assets);
    const actex::LossDistribution loss = actex::evaluate(x, ws.scen);
    const actex::RiskReport report = actex::risk_report(loss, ws.cfg.alphas);

    std::printf("%sportfolio:%s %s  (%zu asset names matched)\n", bold_on(), bold_off(), portfolio_path.c_str(),
                rows.size());
    std::printf("mean       % .8f\n", report.mean);
    std::printf("variance   % .10f\n", report.variance);
    std::printf("std_dev    % .8f\n", report.std_dev);
    std::printf("mad        % .8f\n", report.mad);
    std::printf("%s%8s %14s %12s %12s%s\n", bold_on(), "alpha", "var_quantile", "var_risk", "cvar_risk", bold_off());
    for (const auto& t : report.tails)
        std::printf("%8.4f %14.8f %12.8f %12.8f\n", t.alpha, t.var_quantile, t.var_risk, t.cvar_risk);

    json j = report_header(ws, "report");
    j["portfolio"] = portfolio_path;
    j["metrics"] = {{"mean", report.mean}, {"variance", report.variance}, {"std_dev", report.std_dev},
                    {"mad", report.mad}};
    json tails = json::array();
    for (const auto& t : report.tails)
        tails.push_back({{"alpha", t.alpha}, {"var_quantile", t.var_quantile}, {"var_risk", t.var_risk},
                         {"cvar_risk", t.cvar_risk}});
    j["tails"] = tails;
    write_json_file(j, fs::path(ws.cfg.out_dir) / "report.json");
    return 0;
}

// ---------------------------------------------------------------------------

void add_common_flags(CLI::App* sub, FlagOverrides& f) {
    sub->add_option("--config", f.config_path, "JSON configuration file");
    sub->add_option("--data", f.data_path, "scenario CSV (overrides config)");
    sub->add_option("--risk", f.risk_name, "risk functional: variance|stddev|mad|var|cvar");
    sub->add_option("--alpha", f.alpha, "tail level for var/cvar risks");
    sub->add_option("--mu", f.mu, "return floor; repeat to form the frontier grid");
    sub->add_option("--baseline", f.baseline, "compute the convex baseline: on|off");
    sub->add_option("--out", f.out_dir, "output directory (default: out)");
    sub->add_option("--seed", f.seed, "RNG seed; omitted -> drawn and printed");
    sub->add_option("--threads", f.threads, "worker threads for sampling/search");
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Scenario-based active-extension portfolio optimizer"};
    app.set_version_flag("--version", std::string("actex ") + actex::kVersion);
    app.require_subcommand(1);

    FlagOverrides flags;
    std::size_t sample_count = 100;
    std::string portfolio_path;

    CLI::App* optimize = app.add_subcommand("optimize", "run the multi-start search and write artifacts");
    add_common_flags(optimize, flags);
    CLI::App* compare = app.add_subcommand("compare", "heuristic vs convex baseline allocation table");
    add_common_flags(compare, flags);
    CLI::App* frontier = app.add_subcommand("frontier", "risk/return sweep over a return-floor grid");
    add_common_flags(frontier, flags);
    CLI::App* sample = app.add_subcommand("sample", "emit random feasible portfolios (debug aid)");
    add_common_flags(sample, flags);
    sample->add_option("--count", sample_count, "number of portfolios to draw (default 100)");
    CLI::App* report = app.add_subcommand("report", "risk report for an existing portfolio file");
    add_common_flags(report, flags);
    report->add_option("--portfolio", portfolio_path, "portfolio CSV (asset,weight)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (optimize->parsed()) return cmd_optimize(flags);
        if (compare->parsed()) return cmd_compare(flags);
        if (frontier->parsed()) return cmd_frontier(flags);
        if (sample->parsed()) return cmd_sample(flags, sample_count);
        if (report->parsed()) return cmd_report(flags, portfolio_path);
    } catch (const actex::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const actex::DimensionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const actex::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const actex::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return dispatch(argc, argv); }
