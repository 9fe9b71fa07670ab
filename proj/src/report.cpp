#include "tpg/report.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

namespace tpg {

using nlohmann::json;

std::string format_number(double value) {
    if (value == 0.0) value = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

std::string format_optional(const std::optional<double>& value) {
    return value ? format_number(*value) : std::string{};
}

void write_mechanism_csv(std::ostream& os, const std::vector<CellStats>& cells, Protocol mechanism) {
    os << "v,p,mechanism,success_prob,se,ci95_half,welfare_mean,welfare_se,mean_subsidy,"
          "mean_privacy_cost,failed_with_contribution,a_star,q_star,g_tilde,n_mc\n";
    const auto name = protocol_name(mechanism);
    for (const auto& cell : cells) {
        const auto& s = cell.at(mechanism);
        std::optional<double> a, q, g;
        if (mechanism == Protocol::C && cell.cutoff) {
            a = cell.cutoff->a_star;
            q = cell.cutoff->q_star;
            g = cell.cutoff->g_tilde;
        }
        os << format_number(cell.v) << ',' << format_number(cell.p) << ',' << name << ','
           << format_number(s.success_prob) << ',' << format_number(s.se) << ','
           << format_number(s.ci95_half) << ',' << format_number(s.welfare_mean) << ','
           << format_number(s.welfare_se) << ',' << format_number(s.mean_subsidy) << ','
           << format_number(s.mean_privacy_cost) << ',' << s.failed_with_contribution << ','
           << format_optional(a) << ',' << format_optional(q) << ',' << format_optional(g) << ','
           << s.n_mc << '\n';
    }
}

void write_pairs_csv(std::ostream& os, const std::vector<CellStats>& cells) {
    os << "v,p,first,second,success_diff,success_se,welfare_diff,welfare_se,n_mc\n";
    for (const auto& cell : cells) {
        for (const auto& d : cell.pairs) {
            os << format_number(cell.v) << ',' << format_number(cell.p) << ','
               << protocol_name(d.first) << ',' << protocol_name(d.second) << ','
               << format_number(d.success_diff) << ',' << format_number(d.success_se) << ','
               << format_number(d.welfare_diff) << ',' << format_number(d.welfare_se) << ','
               << cell.n_mc << '\n';
        }
    }
}

void write_cost_csv(std::ostream& os, const std::vector<CellStats>& cells) {
    os << "v,p,prob_s_multi,prob_m_multi,gap,common_count,n_mc\n";
    for (const auto& cell : cells) {
        if (!cell.cost_efficiency) continue;
        const auto& ce = *cell.cost_efficiency;
        os << format_number(cell.v) << ',' << format_number(cell.p) << ','
           << format_number(ce.prob_s_multi) << ',' << format_number(ce.prob_m_multi) << ','
           << format_optional(ce.gap) << ',' << ce.common_count << ',' << cell.n_mc << '\n';
    }
}

void write_pareto_csv(std::ostream& os, const std::vector<CellStats>& cells) {
    os << "v,p,frac_no_worse,mean_share_worse,mean_compensation,n_mc\n";
    for (const auto& cell : cells) {
        if (!cell.pareto) continue;
        const auto& pr = *cell.pareto;
        os << format_number(cell.v) << ',' << format_number(cell.p) << ','
           << format_number(pr.frac_no_worse) << ',' << format_number(pr.mean_share_worse) << ','
           << format_number(pr.mean_compensation) << ',' << cell.n_mc << '\n';
    }
}

namespace {

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ostringstream buffer;
    writer(buffer);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << buffer.str();
    os.flush();
    if (!os) throw IoError("failed writing " + path.string());
}

std::string prefix(const LabelledRun& run) { return run.label.empty() ? "" : run.label + "_"; }

}  // namespace

std::vector<std::string> write_run(const std::filesystem::path& dir, const LabelledRun& run,
                                   const std::vector<CellStats>& cells) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    std::vector<std::string> files;
    const auto pre = prefix(run);
    for (auto m : {Protocol::C, Protocol::S, Protocol::M, Protocol::L}) {
        if (cells.empty() || !cells.front().find(m)) continue;
        const auto name = pre + std::string(protocol_name(m)) + ".csv";
        write_file(dir / name, [&](std::ostream& os) { write_mechanism_csv(os, cells, m); });
        files.push_back(name);
    }
    if (!cells.empty() && !cells.front().pairs.empty()) {
        const auto name = pre + "pairs.csv";
        write_file(dir / name, [&](std::ostream& os) { write_pairs_csv(os, cells); });
        files.push_back(name);
    }
    if (!cells.empty() && cells.front().cost_efficiency) {
        const auto name = pre + "diag_cost.csv";
        write_file(dir / name, [&](std::ostream& os) { write_cost_csv(os, cells); });
        files.push_back(name);
    }
    if (!cells.empty() && cells.front().pareto) {
        const auto name = pre + "diag_pareto.csv";
        write_file(dir / name, [&](std::ostream& os) { write_pareto_csv(os, cells); });
        files.push_back(name);
    }
    return files;
}

json config_to_json(const SweepConfig& c) {
    json mechs = json::array();
    for (auto m : c.mechanisms) mechs.push_back(std::string(protocol_name(m)));
    return json{
        {"n", c.n},
        {"X", c.X},
        {"pi", c.pi},
        {"enforce_provider_profit", c.enforce_provider_profit},
        {"v_grid", c.v_grid},
        {"p_grid", c.p_grid},
        {"n_mc", c.n_mc},
        {"master_seed", c.master_seed},
        {"dist", c.dist.to_string()},
        {"b0", c.b0},
        {"tau", c.tau},
        {"mechanisms", mechs},
        {"cutoff",
         {{"grid_size", c.cutoff.grid_size},
          {"mode", c.cutoff.mode == PivotalMode::monte_carlo ? "monte_carlo" : "closed_form"},
          {"mc_draws", c.cutoff.mc_draws},
          {"mc_seed", c.cutoff.mc_seed},
          {"refine_root", c.cutoff.refine_root}}},
        {"diagnostics", c.diagnostics},
        {"min_common", c.min_common},
    };
}

namespace {

template <class T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(key, "missing from manifest");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, std::string("malformed in manifest: ") + e.what());
    }
}

}  // namespace

SweepConfig config_from_json(const json& j) {
    SweepConfig c;
    c.n = field<int>(j, "n");
    c.X = field<double>(j, "X");
    c.pi = field<double>(j, "pi");
    c.enforce_provider_profit = field<bool>(j, "enforce_provider_profit");
    c.v_grid = field<std::vector<double>>(j, "v_grid");
    c.p_grid = field<std::vector<double>>(j, "p_grid");
    c.n_mc = field<int>(j, "n_mc");
    c.master_seed = field<std::uint64_t>(j, "master_seed");
    c.dist = CostDistribution::parse(field<std::string>(j, "dist"));
    c.b0 = field<double>(j, "b0");
    c.tau = field<double>(j, "tau");
    c.mechanisms.clear();
    for (const auto& name : field<std::vector<std::string>>(j, "mechanisms"))
        c.mechanisms.push_back(parse_protocol(name));
    const auto cut = field<json>(j, "cutoff");
    c.cutoff.grid_size = field<int>(cut, "grid_size");
    const auto mode = field<std::string>(cut, "mode");
    if (mode == "monte_carlo") {
        c.cutoff.mode = PivotalMode::monte_carlo;
    } else if (mode == "closed_form") {
        c.cutoff.mode = PivotalMode::closed_form;
    } else {
        throw ConfigError("mode", "unknown pivotal mode '" + mode + "'");
    }
    c.cutoff.mc_draws = field<int>(cut, "mc_draws");
    c.cutoff.mc_seed = field<std::uint64_t>(cut, "mc_seed");
    c.cutoff.refine_root = field<bool>(cut, "refine_root");
    c.diagnostics = field<bool>(j, "diagnostics");
    c.min_common = field<int>(j, "min_common");
    c.validate();
    return c;
}

json RunManifest::to_json() const {
    json runs_json = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        runs_json.push_back({{"label", runs[i].label},
                             {"config", config_to_json(runs[i].config)},
                             {"outputs", i < outputs.size() ? outputs[i] : std::vector<std::string>{}}});
    }
    return json{{"tool", "tpg_sim"},
                {"version", version},
                {"created", created},
                {"preset", preset},
                {"runs", runs_json}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest m;
    m.version = j.value("version", std::string{});
    m.created = j.value("created", std::string{});
    m.preset = j.value("preset", std::string{});
    for (const auto& r : field<json>(j, "runs")) {
        LabelledRun run;
        run.label = field<std::string>(r, "label");
        run.config = config_from_json(field<json>(r, "config"));
        m.runs.push_back(std::move(run));
        m.outputs.push_back(r.value("outputs", std::vector<std::string>{}));
    }
    return m;
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest) {
    write_file(path, [&](std::ostream& os) { os << manifest.to_json().dump(2) << '\n'; });
}

RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read manifest " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("manifest", std::string("not valid JSON: ") + e.what());
    }
    return RunManifest::from_json(j);
}

}  // namespace tpg
