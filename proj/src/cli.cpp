#include "tpg/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tpg/log.hpp"
#include "tpg/primitives.hpp"

namespace tpg {

namespace {

double parse_double(std::string_view text, const std::string& field) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value))
        throw ConfigError(field, "'" + std::string(text) + "' is not a number");
    return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

std::string b0_tag(double b0) { return format_number(b0); }

}  // namespace

std::vector<double> parse_grid(std::string_view text, const std::string& field) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError(field, "expected lo:hi:count, got '" + std::string(text) + "'");
    const double lo = parse_double(parts[0], field);
    const double hi = parse_double(parts[1], field);
    int count = 0;
    auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), count);
    if (ec != std::errc{} || ptr != parts[2].data() + parts[2].size() || count < 1)
        throw ConfigError(field, "count must be a positive integer");
    if (count == 1) {
        if (lo != hi) throw ConfigError(field, "a one-point grid needs lo == hi");
        return {lo};
    }
    if (!(hi > lo)) throw ConfigError(field, "hi must exceed lo");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    grid.back() = hi;
    return grid;
}

std::vector<Protocol> parse_mechanisms(std::string_view text) {
    std::vector<Protocol> out;
    for (auto part : split(text, ',')) {
        const auto m = parse_protocol(part);
        for (auto seen : out)
            if (seen == m) throw ConfigError("mech", "mechanism '" + std::string(part) + "' listed twice");
        out.push_back(m);
    }
    return out;
}

std::vector<LabelledRun> preset_runs(const std::string& name, const SweepConfig& base) {
    std::vector<LabelledRun> runs;
    auto with = [&](std::string label, auto&& edit) {
        LabelledRun r{std::move(label), base};
        edit(r.config);
        runs.push_back(std::move(r));
    };
    if (name == "fig1") {
        for (double b0 : {0.0, 0.15, 0.3}) {
            with("fig1_b0_" + b0_tag(b0), [&](SweepConfig& c) {
                c.mechanisms = {Protocol::C};
                c.b0 = b0;
            });
        }
    } else if (name == "fig2" || name == "fig3") {
        with(name, [](SweepConfig& c) {
            c.mechanisms = {Protocol::C, Protocol::S, Protocol::M};
            c.b0 = 0.15;
        });
    } else if (name == "robust-beta") {
        for (auto [tag, a, b] : {std::tuple{"beta25", 2.0, 5.0}, std::tuple{"beta52", 5.0, 2.0}}) {
            with(std::string("robust-beta_") + tag, [&](SweepConfig& c) {
                c.mechanisms = {Protocol::C, Protocol::S, Protocol::M};
                c.b0 = 0.15;
                c.dist = CostDistribution::scaled_beta(a, b, 1.0, 5.0);
            });
        }
    } else if (name == "robust-noise") {
        for (double tau : {0.0, 0.2, 0.5}) {
            with("robust-noise_tau_" + format_number(tau), [&](SweepConfig& c) {
                c.mechanisms = {Protocol::S, Protocol::M};
                c.tau = tau;
            });
        }
    } else if (name == "diag-cost") {
        with(name, [](SweepConfig& c) {
            c.mechanisms = {Protocol::S, Protocol::M};
            c.diagnostics = true;
        });
    } else if (name == "diag-pareto") {
        with(name, [](SweepConfig& c) {
            c.mechanisms = {Protocol::C, Protocol::M};
            c.b0 = 0.15;
            c.diagnostics = true;
        });
    } else {
        throw ConfigError("preset", "unknown preset '" + name + "'");
    }
    return runs;
}

void golden_report(std::ostream& os) {
    const CostVector costs{10.0, 40.0, 100.0};
    const auto params = Params::make(3, 1.2005, 3.5, 0.05);
    auto fmt = [](double x) {
        std::ostringstream s;
        s << std::setprecision(6) << x;
        return s.str();
    };

    os << "instance: n=3 X=1.2005 V=3.5 p=0.05 costs=(10, 40, 100)\n";
    os << "floors:";
    double floors = 0.0;
    for (double c : costs) {
        const double f = floor_contribution(c, params.p);
        floors += f;
        os << ' ' << fmt(f);
    }
    os << "  (sum " << fmt(floors) << ")\n";

    const auto plan = build_pool(costs, params);
    os << "pool K = {";
    for (std::size_t j = 0; j < plan.pool.size(); ++j) os << (j ? ", " : "") << "c=" << costs[plan.pool[j]];
    os << "}  k=" << plan.pool_size() << "  D_K=" << fmt(plan.residual)
       << "  D_1=" << fmt(residual_demand(costs, params, 1)) << '\n';
    os << "capacities:";
    for (auto i : plan.pool) os << " dbar(" << costs[i] << ")=" << fmt(max_fill(costs[i], params.V, params.p));
    os << '\n';

    const auto s = s_outcome(costs, params);
    WaterFillProblem wf;
    wf.demand = plan.residual;
    for (auto i : plan.pool) {
        wf.costs.push_back(costs[i]);
        wf.lower.push_back(plan.floors[i]);
        wf.upper.push_back(1.0);
    }
    const auto split_s = water_fill(wf);
    os << "S targets:";
    for (double e : split_s.allocation) os << ' ' << fmt(e);
    os << "  lambda=" << fmt(split_s.level) << '\n';
    os << "S Gamma*:";
    for (std::size_t j = 0; j < plan.pool.size(); ++j)
        os << ' ' << fmt(gamma_star(wf.costs[j], params.p, split_s.allocation[j]));
    os << "  binding c=" << (s.binding_user >= 0 ? costs[static_cast<std::size_t>(s.binding_user)] : 0.0)
       << "  -> S " << (s.success ? "succeeds" : "null (binding Gamma* exceeds V)") << '\n';

    const auto m = m_outcome(costs, params);
    os << "M retentions:";
    for (double e : m.e) os << ' ' << fmt(e);
    os << '\n';
    os << "M Gamma*:";
    for (auto i : plan.pool) os << ' ' << fmt(gamma_star(costs[i], params.p, m.e[i]));
    os << "  at rounded (0.84, 0.36): " << fmt(gamma_star(10.0, params.p, 0.84)) << ' '
       << fmt(gamma_star(40.0, params.p, 0.36)) << '\n';
    const auto mo = m.to_mechanism_outcome(costs, params);
    os << "M " << (m.success ? "succeeds" : "fails") << "  aggregate=" << fmt(mo.aggregate())
       << "  welfare=" << fmt(social_welfare(costs, mo, params))
       << "  provider payoff=" << fmt(mo.provider_payoff) << '\n';
}

namespace {

struct Flags {
    std::string preset;
    std::string grid_v;
    std::string grid_p;
    std::optional<int> n;
    std::optional<double> x;
    std::optional<double> subsidy_max;
    std::optional<int> draws;
    std::string dist;
    std::optional<double> b0;
    std::optional<double> tau;
    std::optional<double> pi;
    bool enforce = false;
    std::string mech;
    std::optional<std::uint64_t> seed;
    std::string out = "results";
    std::optional<int> threads;
    std::string manifest;
    std::optional<int> cutoff_grid;
    std::optional<int> aux_draws;
    std::optional<int> min_common;
    bool quiet = false;
};

int resolve_threads(const Flags& f) {
    if (f.threads) {
        if (*f.threads < 0) throw ConfigError("threads", "must be >= 0");
        return *f.threads;
    }
    if (const char* env = std::getenv("THRESHOLD_MECH_THREADS"); env && *env) {
        int value = 0;
        const std::string_view text(env);
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size() || value < 0)
            throw ConfigError("threads", "THRESHOLD_MECH_THREADS must be a non-negative integer");
        return value;
    }
    return 1;
}

SweepConfig base_config(const Flags& f) {
    SweepConfig c;
    c.v_grid = parse_grid("0:5:20", "grid-v");
    c.p_grid = parse_grid("0:0.65:20", "grid-p");
    c.master_seed = 1;
    if (!f.grid_v.empty()) c.v_grid = parse_grid(f.grid_v, "grid-v");
    if (f.subsidy_max) {
        if (!f.grid_p.empty()) throw ConfigError("subsidy-max", "conflicts with --grid-p");
        if (!(*f.subsidy_max > 0.0)) throw ConfigError("subsidy-max", "must be > 0");
        c.p_grid = parse_grid("0:" + format_number(*f.subsidy_max) + ":20", "subsidy-max");
    }
    if (!f.grid_p.empty()) c.p_grid = parse_grid(f.grid_p, "grid-p");
    if (f.n) c.n = *f.n;
    if (f.x) c.X = *f.x;
    if (f.draws) c.n_mc = *f.draws;
    if (!f.dist.empty()) c.dist = CostDistribution::parse(f.dist);
    if (f.pi) c.pi = *f.pi;
    c.enforce_provider_profit = f.enforce;
    if (f.seed) c.master_seed = *f.seed;
    if (f.cutoff_grid) c.cutoff.grid_size = *f.cutoff_grid;
    if (f.aux_draws) {
        if (*f.aux_draws < 1) throw ConfigError("aux-draws", "must be >= 1");
        c.cutoff.mode = PivotalMode::monte_carlo;
        c.cutoff.mc_draws = *f.aux_draws;
    }
    if (f.min_common) c.min_common = *f.min_common;
    return c;
}

// Flags given explicitly win over whatever a preset chose.
void apply_overrides(const Flags& f, SweepConfig& c) {
    if (f.b0) c.b0 = *f.b0;
    if (f.tau) c.tau = *f.tau;
    if (!f.dist.empty()) c.dist = CostDistribution::parse(f.dist);
    if (!f.mech.empty()) c.mechanisms = parse_mechanisms(f.mech);
}

// Collapse preset runs that an explicit override made identical.
std::vector<LabelledRun> dedupe(std::vector<LabelledRun> runs) {
    std::vector<LabelledRun> out;
    for (auto& r : runs) {
        bool dup = false;
        for (const auto& o : out) dup = dup || config_to_json(o.config) == config_to_json(r.config);
        if (!dup) out.push_back(std::move(r));
    }
    return out;
}

std::vector<LabelledRun> build_runs(const Flags& f) {
    const SweepConfig base = base_config(f);
    std::vector<LabelledRun> runs;
    if (f.preset.empty()) {
        runs.push_back({"", base});
        if (f.mech.empty()) runs.back().config.mechanisms = {Protocol::C, Protocol::S, Protocol::M};
    } else {
        runs = preset_runs(f.preset, base);
    }
    const bool multi = runs.size() > 1;
    for (auto& r : runs) {
        apply_overrides(f, r.config);
        if (multi) {
            // Relabel runs whose distinguishing knob was overridden.
            if (f.preset == "fig1" && f.b0) r.label = "fig1_b0_" + b0_tag(*f.b0);
            if (f.preset == "robust-noise" && f.tau) r.label = "robust-noise_tau_" + format_number(*f.tau);
            if (f.preset == "robust-beta" && !f.dist.empty()) r.label = "robust-beta";
        }
        r.config.validate();
    }
    return dedupe(std::move(runs));
}

int execute(const std::vector<LabelledRun>& runs, const std::string& preset, const std::string& out_dir,
            int threads, bool quiet, std::ostream& out) {
    RunManifest manifest;
    manifest.version = TPG_VERSION;
    manifest.created = utc_timestamp();
    manifest.preset = preset;
    const std::filesystem::path dir(out_dir);
    for (auto run : runs) {
        run.config.threads = threads;
        const auto cells = sweep(run.config);
        auto files = write_run(dir, run, cells);
        if (!quiet) {
            for (const auto& file : files) out << (dir / file).string() << '\n';
        }
        manifest.runs.push_back(run);
        manifest.outputs.push_back(std::move(files));
    }
    write_manifest(dir / "manifest.json", manifest);
    if (!quiet) out << (dir / "manifest.json").string() << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte Carlo sweeps for threshold public-goods data contribution mechanisms", "tpg_sim"};
    Flags f;
    app.add_option("--preset", f.preset,
                   "fig1, fig2, fig3, robust-beta, robust-noise, diag-cost, diag-pareto, appc-example");
    app.add_option("--grid-v", f.grid_v, "value grid lo:hi:count (default 0:5:20)");
    app.add_option("--grid-p", f.grid_p, "subsidy grid lo:hi:count (default 0:0.65:20)");
    app.add_option("--n", f.n, "number of users (default 50)");
    app.add_option("--x", f.x, "provision threshold, non-integer (default 10.5)");
    app.add_option("--subsidy-max", f.subsidy_max, "shorthand for --grid-p 0:MAX:20");
    app.add_option("--draws", f.draws, "cost draws per cell (default 1000)");
    app.add_option("--dist", f.dist, "uniform:LO,HI or beta:A,B[:LO,HI] (default uniform:1,5)");
    app.add_option("--b0", f.b0, "belief cap for mechanism C (default 0.15)");
    app.add_option("--tau", f.tau, "lognormal cost-observation noise (default 0)");
    app.add_option("--pi", f.pi, "provider value multiplier (default 1)");
    app.add_flag("--enforce-provider-profit", f.enforce, "provider withdraws plans it would lose money on");
    app.add_option("--mech", f.mech, "comma list of C,S,M,L (default C,S,M)");
    app.add_option("--seed", f.seed, "master seed (default 1)");
    app.add_option("--out", f.out, "output directory (default results)");
    app.add_option("--threads", f.threads, "worker threads, 0 = all cores (env THRESHOLD_MECH_THREADS)");
    app.add_option("--manifest", f.manifest, "re-run every sweep recorded in a manifest.json");
    app.add_option("--cutoff-grid", f.cutoff_grid, "belief search grid points (default 40)");
    app.add_option("--aux-draws", f.aux_draws, "estimate the pivotal probability from this many draws");
    app.add_option("--min-common", f.min_common, "common successes needed for the masked cost gap (default 30)");
    app.add_flag("--quiet", f.quiet, "do not list written files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (f.preset == "appc-example") {
            golden_report(out);
            return 0;
        }
        const int threads = resolve_threads(f);
        if (!f.manifest.empty()) {
            if (!f.preset.empty()) throw ConfigError("manifest", "cannot be combined with --preset");
            const auto manifest = read_manifest(f.manifest);
            return execute(manifest.runs, manifest.preset, f.out, threads, f.quiet, out);
        }
        return execute(build_runs(f), f.preset, f.out, threads, f.quiet, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace tpg
