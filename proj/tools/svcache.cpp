// svcache: command-line experiment runner.
//
//   svcache validate  analytic vs simulated probabilities and rates
//   svcache analyze   analytic probabilities and rates on a threshold grid
//   svcache simulate  simulated probabilities and rates (optional per-drop dump)
//   svcache optimize  run the caching optimizer for one scheme
//   svcache compare   EE of every scheme and baseline over a parameter sweep
//
// Every command writes CSV files plus a JSON manifest describing the columns.
// Exit status: 0 success, 1 invalid input or failed validation, 2 solver did
// not converge.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <svcache/svcache.hpp>

namespace fs = std::filesystem;
namespace an = svcache::analytic;
namespace mc = svcache::montecarlo;
using json = nlohmann::json;
using namespace svcache;

namespace {

constexpr int kSchemaVersion = 1;

enum ExitCode { ok = 0, invalid = 1, not_converged = 2 };

struct Globals {
    std::string config;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::size_t drops = 100000;
    double theta = 0.01;
    std::size_t samples = 200000;
    unsigned workers = 0;
};

Scenario load(const Globals& g) {
    Scenario s = g.config.empty() ? Scenario{} : load_scenario(g.config);
    s.validate();
    for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
    return s;
}

an::PositionSampling sampling(const Globals& g) {
    an::PositionSampling p;
    p.samples = g.samples;
    p.seed = g.seed;
    p.workers = g.workers;
    return p;
}

mc::SimulationSettings simulation(const Globals& g) {
    mc::SimulationSettings s;
    s.drops = g.drops;
    s.seed = g.seed;
    s.workers = g.workers;
    return s;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad grid value '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty grid");
    return out;
}

/** A CSV file in the output directory together with its manifest entry. */
class Table {
public:
    Table(const Globals& g, std::string name, std::string schema, std::vector<std::pair<std::string, std::string>> cols)
        : path_(fs::path(g.out_dir) / name), schema_(std::move(schema)), cols_(std::move(cols)) {
        out_.open(path_);
        if (!out_) throw std::runtime_error("cannot write " + path_.string());
        out_.precision(10);
        for (std::size_t i = 0; i < cols_.size(); ++i) out_ << (i ? "," : "") << cols_[i].first;
        out_ << '\n';
    }

    template <class... T>
    void row(const T&... values) {
        std::size_t i = 0;
        ((out_ << (i++ ? "," : "") << values), ...);
        out_ << '\n';
    }

    std::ostream& stream() { return out_; }

    json manifest_entry() const {
        json cols = json::array();
        for (const auto& [name, role] : cols_) cols.push_back({{"name", name}, {"role", role}});
        return {{"path", path_.filename().string()}, {"schema", schema_ + "/" + std::to_string(kSchemaVersion)},
                {"columns", cols}};
    }

private:
    fs::path path_;
    std::string schema_;
    std::vector<std::pair<std::string, std::string>> cols_;
    std::ofstream out_;
};

void write_manifest(const Globals& g, const std::string& command, const std::vector<const Table*>& tables,
                    json extra = json::object()) {
    json files = json::array();
    for (const auto* t : tables) files.push_back(t->manifest_entry());
    json m = {{"schema_version", kSchemaVersion},
              {"command", command},
              {"seed", g.seed},
              {"config", g.config.empty() ? json(nullptr) : json(g.config)},
              {"files", files}};
    m.update(extra);
    std::ofstream(fs::path(g.out_dir) / (command + "_manifest.json")) << m.dump(2) << '\n';
}

const char* layer_name(an::Layer l) { return l == an::Layer::base ? "bl" : "el"; }

std::vector<int> serving_counts(int n_max) { return n_max > 1 ? std::vector<int>{1, n_max} : std::vector<int>{1}; }

const std::vector<double> kGammaGridDb{0.0, 5.0, 10.0, 15.0, 20.0};

// ---------------------------------------------------------------- validate

int cmd_validate(const Globals& g) {
    const auto s = load(g);
    const auto& cfg = s.network;
    const auto sim = mc::simulate(cfg, simulation(g));
    const auto ps = sampling(g);

    Table t(g, "validate.csv", "svcache.validate",
            {{"quantity", "group"},
             {"n_serving", "group"},
             {"gamma_db", "x"},
             {"analytic", "y"},
             {"analytic_se", "error"},
             {"mc", "y"},
             {"mc_se", "error"},
             {"mc_samples", "meta"},
             {"tolerance", "meta"},
             {"status", "meta"}});
    int fails = 0, inconclusive = 0, passes = 0;
    auto record = [&](const std::string& q, int n, double db, double a, double a_se, std::optional<Estimate> m,
                      double floor, bool thin) {
        std::string status;
        double tol = 0.0;
        if (!m || thin) {
            status = "inconclusive";
        } else {
            tol = std::max(floor, 3.0 * std::hypot(a_se, m->std_error));
            status = std::abs(a - m->mean) <= tol ? "pass" : "fail";
        }
        (status == "pass" ? passes : status == "fail" ? fails : inconclusive)++;
        t.row(q, n, db, a, a_se, m ? std::to_string(m->mean) : "", m ? std::to_string(m->std_error) : "",
              m ? m->n_samples : 0, tol, status);
    };

    for (double db : kGammaGridDb) {
        const double gamma = db_to_linear(db);
        auto probability = [&](const std::string& q, int n, double a, double a_se, const std::vector<double>& sir) {
            const auto m = mc::success_fraction(sir, gamma, g.seed);
            // Undecidable at the 0.01 level when even the worst-case binomial error is larger.
            const double worst_se = 0.5 / std::sqrt(static_cast<double>(sir.size()));
            record(q, n, db, a, a_se, m, 0.01, worst_se > 0.01);
        };
        auto rate = [&](const std::string& q, int n, double a, double a_se, const std::vector<double>& sir) {
            std::optional<Estimate> m;
            try {
                m = mc::conditional_rate(sir, gamma, cfg.w, g.seed);
            } catch (const mc::InsufficientSamples&) {
            }
            record(q, n, db, a, a_se, m, 0.03 * a, !m);
        };

        probability("p_mbs", 0, an::p_success_mbs(cfg, gamma), 0.0, sim.mbs);
        rate("rate_mbs", 0, an::ergodic_rate_mbs(cfg, gamma), 0.0, sim.mbs);
        for (auto layer : {an::Layer::base, an::Layer::enhancement}) {
            const auto& cols = layer == an::Layer::base ? sim.bl : sim.el;
            for (int n : serving_counts(layer == an::Layer::base ? cfg.n1 : cfg.n2)) {
                const auto& sir = cols[static_cast<std::size_t>(n - 1)];
                const auto p = an::p_success_sbs(cfg, layer, gamma, n, ps);
                probability(std::string("p_sbs_") + layer_name(layer), n, p.mean, p.std_error, sir);
                const auto r = an::ergodic_rate_sbs(cfg, layer, gamma, n, ps);
                rate(std::string("rate_sbs_") + layer_name(layer), n, r.mean, r.std_error, sir);
            }
        }
    }
    write_manifest(g, "validate", {&t}, {{"drops", g.drops}, {"position_samples", g.samples}});
    std::cout << "validate: " << passes << " pass, " << fails << " fail, " << inconclusive << " inconclusive\n";
    return fails ? ExitCode::invalid : ExitCode::ok;
}

// ----------------------------------------------------------------- analyze

int cmd_analyze(const Globals& g) {
    const auto s = load(g);
    const auto& cfg = s.network;
    const auto ps = sampling(g);
    Table t(g, "analyze.csv", "svcache.analyze",
            {{"quantity", "group"}, {"n_serving", "group"}, {"gamma_db", "x"}, {"value", "y"}, {"std_error", "error"}});
    for (double db : kGammaGridDb) {
        const double gamma = db_to_linear(db);
        t.row("p_mbs", 0, db, an::p_success_mbs(cfg, gamma), 0.0);
        t.row("rate_mbs", 0, db, an::ergodic_rate_mbs(cfg, gamma), 0.0);
        for (auto layer : {an::Layer::base, an::Layer::enhancement})
            for (int n = 1; n <= (layer == an::Layer::base ? cfg.n1 : cfg.n2); ++n) {
                const auto p = an::p_success_sbs(cfg, layer, gamma, n, ps);
                const auto r = an::ergodic_rate_sbs(cfg, layer, gamma, n, ps);
                t.row(std::string("p_sbs_") + layer_name(layer), n, db, p.mean, p.std_error);
                t.row(std::string("rate_sbs_") + layer_name(layer), n, db, r.mean, r.std_error);
            }
    }

    an::RateTableSettings rs;
    rs.sampling = ps;
    const auto table = an::build_rate_table(cfg, rs);
    Table r(g, "rate_table.csv", "svcache.rate_table",
            {{"link", "group"}, {"n_serving", "x"}, {"gamma_db", "meta"}, {"rate", "y"}, {"std_error", "error"}});
    r.row("mbs_bl", 0, linear_to_db(cfg.gamma_bl), table.r_m_bl, 0.0);
    r.row("mbs_el", 0, linear_to_db(cfg.gamma_el), table.r_m_el, 0.0);
    for (std::size_t i = 0; i < table.r_s_bl.size(); ++i)
        r.row("sbs_bl", i + 1, linear_to_db(cfg.gamma_bl), table.r_s_bl[i], table.r_s_bl_error[i]);
    for (std::size_t i = 0; i < table.r_s_el.size(); ++i)
        r.row("sbs_el", i + 1, linear_to_db(cfg.gamma_el), table.r_s_el[i], table.r_s_el_error[i]);
    write_manifest(g, "analyze", {&t, &r}, {{"position_samples", g.samples}});
    std::cout << "analyze: R_M(gamma_BL) = " << table.r_m_bl << " bit/s, R_M(gamma_EL) = " << table.r_m_el
              << " bit/s\n";
    return ExitCode::ok;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Globals& g, const std::string& dump) {
    const auto s = load(g);
    const auto& cfg = s.network;
    const auto sim = mc::simulate(cfg, simulation(g));
    Table t(g, "simulate.csv", "svcache.simulate",
            {{"quantity", "group"},
             {"n_serving", "group"},
             {"gamma_db", "x"},
             {"value", "y"},
             {"std_error", "error"},
             {"samples", "meta"}});
    auto rows = [&](const std::string& suffix, int n, const std::vector<double>& sir, double db) {
        const double gamma = db_to_linear(db);
        const auto p = mc::success_fraction(sir, gamma, g.seed);
        t.row("p_" + suffix, n, db, p.mean, p.std_error, p.n_samples);
        try {
            const auto r = mc::conditional_rate(sir, gamma, cfg.w, g.seed);
            t.row("rate_" + suffix, n, db, r.mean, r.std_error, r.n_samples);
        } catch (const mc::InsufficientSamples&) {
            t.row("rate_" + suffix, n, db, "", "", 0);
        }
    };
    for (double db : kGammaGridDb) {
        rows("mbs", 0, sim.mbs, db);
        for (std::size_t i = 0; i < sim.bl.size(); ++i) rows("sbs_bl", static_cast<int>(i + 1), sim.bl[i], db);
        for (std::size_t i = 0; i < sim.el.size(); ++i) rows("sbs_el", static_cast<int>(i + 1), sim.el[i], db);
    }
    std::vector<const Table*> tables{&t};
    if (!dump.empty()) {
        std::ofstream out(dump);
        if (!out) throw std::runtime_error("cannot write " + dump);
        mc::write_dump(out, sim);
    }
    write_manifest(g, "simulate", tables,
                   {{"drops", g.drops},
                    {"window_radius_m", sim.window_radius},
                    {"resampled_drops", sim.resampled},
                    {"dump", dump.empty() ? json(nullptr) : json(dump)}});
    std::cout << "simulate: " << g.drops << " drops, window radius " << sim.window_radius << " m\n";
    return ExitCode::ok;
}

// ---------------------------------------------------------------- optimize

struct OptimizeOptions {
    int scheme = 2;
    std::string init = "uniform";
    std::string step_scale = "relative";
    double step_gain = 50.0;
    int max_iters = 500;
    double rel_tol = 1e-6;
    std::string rates = "analytic";
};

ObjectiveContext context_for(const Scenario& s, const Globals& g, const std::string& rates) {
    an::RateTableSettings rs;
    rs.sampling = sampling(g);
    ObjectiveContext ctx = make_context(s, rs, g.theta);
    if (rates == "mc") ctx.rates = mc::estimate_rate_table(s.network, simulation(g));
    return ctx;
}

SolverSettings solver_settings(const Globals& g, const OptimizeOptions& o) {
    SolverSettings st;
    st.max_iters = o.max_iters;
    st.rel_tol = o.rel_tol;
    st.theta = g.theta;
    st.seed = g.seed;
    st.scale = o.step_scale == "absolute" ? GradientScale::absolute : GradientScale::relative;
    st.step_gain = o.step_gain;
    return st;
}

int cmd_optimize(const Globals& g, const OptimizeOptions& o) {
    const auto s = load(g);
    const auto ctx = context_for(s, g, o.rates);
    const auto mode = o.scheme == 1 ? CachingMode::fractional : CachingMode::random;
    const std::map<std::string, InitKind> kinds{
        {"uniform", InitKind::uniform}, {"popularity", InitKind::popularity}, {"random", InitKind::random}};
    const auto start = make_initial_policy(kinds.at(o.init), ctx.content, g.seed, mode);
    const auto result = optimize(start, ctx, solver_settings(g, o));

    Table p(g, "policy.csv", "svcache.policy",
            {{"file", "x"}, {"popularity", "meta"}, {"q1", "y"}, {"q2", "y"}});
    for (std::size_t f = 0; f < result.policy.q1.size(); ++f)
        p.row(f + 1, ctx.profile.p[f], result.policy.q1[f], result.policy.q2[f]);
    Table tr(g, "trace.csv", "svcache.trace",
             {{"iteration", "x"},
              {"ee", "y"},
              {"ee_exact", "y"},
              {"step", "meta"},
              {"u", "meta"},
              {"v", "meta"},
              {"max_delta", "meta"},
              {"violation", "meta"}});
    // The trace writer emits its own header; rewind past the one Table wrote.
    tr.stream().seekp(0);
    write_trace_csv(tr.stream(), result.trace);

    write_manifest(g, "optimize", {&p, &tr},
                   {{"scheme", o.scheme},
                    {"init", o.init},
                    {"step_scale", o.step_scale},
                    {"step_gain", o.step_gain},
                    {"theta", g.theta},
                    {"rates", o.rates},
                    {"ee", result.ee},
                    {"ee_exact", result.ee_exact},
                    {"iterations", result.trace.rows.size()},
                    {"termination", to_string(result.trace.reason)}});
    std::printf("optimize: scheme %d, %zu iterations (%s), EE %.4f bit/J (exact %.4f)\n", o.scheme,
                result.trace.rows.size(), to_string(result.trace.reason), result.ee, result.ee_exact);
    return result.converged() ? ExitCode::ok : ExitCode::not_converged;
}

// ----------------------------------------------------------------- compare

struct CompareOptions {
    std::string sweep = "gamma_bl";
    std::string grid;
    std::size_t icp_realizations = 200;
    OptimizeOptions solver;
};

const std::map<std::string, std::pair<std::string, std::string>> kSweeps{
    {"p_s", {"dBm", "13,18,23,28,33"}},
    {"gamma_bl", {"dB", "0,5,10,15,20"}},
    {"cache_size", {"Mbit", "0,200,400,600,800,1000"}},
    {"zipf_alpha", {"", "0.2,0.6,1.0,1.4,1.8"}},
};

int cmd_compare(const Globals& g, const CompareOptions& o) {
    const auto base = load(g);
    const auto& [unit, default_grid] = kSweeps.at(o.sweep);
    const auto grid = parse_grid(o.grid.empty() ? default_grid : o.grid);
    Table t(g, "compare.csv", "svcache.compare",
            {{"sweep", "meta"},
             {"value", "x"},
             {"unit", "meta"},
             {"policy", "group"},
             {"ee", "y"},
             {"ee_se", "error"},
             {"iterations", "meta"},
             {"converged", "meta"}});

    // Rates only depend on the network; reuse them across content-only sweeps.
    std::optional<ObjectiveContext> shared;
    bool all_converged = true;
    for (double value : grid) {
        Scenario s = base;
        if (o.sweep == "p_s") s.network.p_s = dbm_to_watts(value);
        if (o.sweep == "gamma_bl") s.network.gamma_bl = db_to_linear(value);
        if (o.sweep == "cache_size") s.content.m_cache = value * 1e6;
        if (o.sweep == "zipf_alpha") s.content.zipf_alpha = value;
        s.validate();

        ObjectiveContext ctx;
        const bool network_sweep = o.sweep == "p_s" || o.sweep == "gamma_bl";
        if (network_sweep || !shared) {
            ctx = context_for(s, g, o.solver.rates);
            if (!network_sweep) shared = ctx;
        } else {
            ctx = *shared;
            ctx.content = s.content;
            ctx.profile = make_profile(s.content);
        }
        const auto settings = solver_settings(g, o.solver);
        const auto ucp1 = ucp_policy(ctx.content), ucp2 = ucp_policy(ctx.content, CachingMode::random);
        const auto s1 = optimize(ucp1, ctx, settings);
        const auto s2 = optimize(ucp2, ctx, settings);
        const auto icp = icp_expected_ee(ctx, o.icp_realizations, g.seed);
        all_converged = all_converged && s1.converged() && s2.converged();

        auto iters = [](const SolverResult& r) { return r.trace.rows.size(); };
        t.row(o.sweep, value, unit, "scheme1", ee_value(s1.policy, ctx), 0.0, iters(s1), s1.converged());
        t.row(o.sweep, value, unit, "scheme1_exact_l0", s1.ee_exact, 0.0, iters(s1), s1.converged());
        t.row(o.sweep, value, unit, "scheme2", s2.ee_exact, 0.0, iters(s2), s2.converged());
        t.row(o.sweep, value, unit, "mpcp", ee_exact(mpcp_policy(ctx.content), ctx), 0.0, 0, "");
        t.row(o.sweep, value, unit, "ucp", ee_exact(ucp1, ctx), 0.0, 0, "");
        t.row(o.sweep, value, unit, "ucp_scheme2", ee_exact(ucp2, ctx), 0.0, 0, "");
        t.row(o.sweep, value, unit, "icp", icp.mean, icp.std_error, 0, "");
        std::printf("compare: %s = %g %s  scheme1 %.1f  scheme2 %.1f  mpcp %.1f  ucp %.1f  icp %.1f\n",
                    o.sweep.c_str(), value, unit.c_str(), s1.ee_exact, s2.ee_exact,
                    ee_exact(mpcp_policy(ctx.content), ctx), ee_exact(ucp1, ctx), icp.mean);
    }
    write_manifest(g, "compare", {&t},
                   {{"sweep", o.sweep},
                    {"theta", g.theta},
                    {"rates", o.solver.rates},
                    {"icp_realizations", o.icp_realizations}});
    return all_converged ? ExitCode::ok : ExitCode::not_converged;
}

void add_solver_options(CLI::App* cmd, OptimizeOptions& o) {
    cmd->add_option("--step-scale", o.step_scale, "Gradient units for the c/t step")
        ->check(CLI::IsMember({"relative", "absolute"}))
        ->capture_default_str();
    cmd->add_option("--step-gain", o.step_gain, "Step gain c in c/t")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--max-iters", o.max_iters, "Iteration limit")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--rel-tol", o.rel_tol, "Relative EE change that counts as converged")->capture_default_str();
    cmd->add_option("--rates", o.rates, "Source of the ergodic rate table")
        ->check(CLI::IsMember({"analytic", "mc"}))
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-efficiency analysis and optimization of layered-video caching in two-tier networks"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "Scenario file (key = value)")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Directory for CSV and manifest output")->capture_default_str();
    app.add_option("--drops", g.drops, "Monte Carlo drops")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--theta", g.theta, "l0 smoothing parameter")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--samples", g.samples, "Serving-position samples for analytic SBS quantities")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--workers", g.workers, "Worker threads (0: all cores)")->capture_default_str();

    auto* validate = app.add_subcommand("validate", "Compare analytic and simulated probabilities and rates");
    app.add_subcommand("analyze", "Analytic probabilities and rates on a threshold grid");
    std::string dump;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo probabilities and rates");
    simulate->add_option("--dump", dump, "Write one row per drop with its SIR values to this file");

    OptimizeOptions opt;
    auto* optimize_cmd = app.add_subcommand("optimize", "Maximize energy efficiency for one caching scheme");
    optimize_cmd->add_option("--scheme", opt.scheme, "1: fractional caching, 2: random caching")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    optimize_cmd->add_option("--init", opt.init, "Starting policy")
        ->check(CLI::IsMember({"uniform", "popularity", "random"}))
        ->capture_default_str();
    add_solver_options(optimize_cmd, opt);

    CompareOptions cmp;
    auto* compare = app.add_subcommand("compare", "EE of both schemes and the baselines over a sweep");
    compare->add_option("--sweep", cmp.sweep, "Swept parameter")
        ->check(CLI::IsMember({"p_s", "gamma_bl", "cache_size", "zipf_alpha"}))
        ->capture_default_str();
    compare->add_option("--grid", cmp.grid,
                        "Comma-separated values (p_s in dBm, gamma_bl in dB, cache_size in Mbit)");
    compare->add_option("--icp-realizations", cmp.icp_realizations, "ICP draws averaged per point")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_solver_options(compare, cmp.solver);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // --help and --version exit 0; every usage error maps to invalid input.
        return app.exit(e) == 0 ? ExitCode::ok : ExitCode::invalid;
    }

    try {
        fs::create_directories(g.out_dir);
        if (validate->parsed()) return cmd_validate(g);
        if (app.got_subcommand("analyze")) return cmd_analyze(g);
        if (simulate->parsed()) return cmd_simulate(g, dump);
        if (optimize_cmd->parsed()) return cmd_optimize(g, opt);
        if (compare->parsed()) return cmd_compare(g, cmp);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return ExitCode::invalid;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return ExitCode::invalid;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return ExitCode::not_converged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExitCode::invalid;
    }
    return ExitCode::invalid;
}
