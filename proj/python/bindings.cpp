#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "tpg/assign.hpp"
#include "tpg/cli.hpp"
#include "tpg/engine.hpp"
#include "tpg/mech_c.hpp"
#include "tpg/primitives.hpp"
#include "tpg/protocols.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace tpg;

namespace {

std::vector<double> water_fill_list(std::vector<double> costs, std::vector<double> lower,
                                    std::vector<double> upper, double demand) {
    return water_fill(WaterFillProblem{std::move(costs), std::move(lower), std::move(upper), demand}).allocation;
}

py::tuple cli(const std::vector<std::string>& args) {
    std::vector<std::string> all{"tpg_sim"};
    all.insert(all.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : all) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Threshold public goods mechanisms: primitives, protocols and Monte Carlo sweeps";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidCutoff>(m, "InvalidCutoff", PyExc_ValueError);
    py::register_exception<Infeasible>(m, "Infeasible", PyExc_ValueError);

    py::class_<Params>(m, "Params")
        .def(py::init(&Params::make), "n"_a, "X"_a, "V"_a, "p"_a, "pi"_a = 1.0,
             "enforce_provider_profit"_a = false)
        .def_readonly("n", &Params::n)
        .def_readonly("X", &Params::X)
        .def_readonly("m", &Params::m)
        .def_readonly("V", &Params::V)
        .def_readonly("p", &Params::p)
        .def_readonly("pi", &Params::pi)
        .def("__repr__", [](const Params& p) {
            std::ostringstream s;
            s << "Params(n=" << p.n << ", X=" << p.X << ", V=" << p.V << ", p=" << p.p << ")";
            return s.str();
        });

    py::class_<CostDistribution>(m, "CostDistribution")
        .def_static("uniform", &CostDistribution::uniform, "low"_a = 1.0, "high"_a = 5.0)
        .def_static("scaled_beta", &CostDistribution::scaled_beta, "alpha"_a, "beta"_a, "low"_a = 1.0,
                    "high"_a = 5.0)
        .def_static("parse", &CostDistribution::parse)
        .def_property_readonly("low", &CostDistribution::low)
        .def_property_readonly("high", &CostDistribution::high)
        .def("pdf", &CostDistribution::pdf)
        .def("cdf", &CostDistribution::cdf)
        .def("inv_cdf", &CostDistribution::inv_cdf)
        .def("floor_mean_tail", &CostDistribution::floor_mean_tail, "a"_a, "p"_a)
        .def(
            "sample",
            [](const CostDistribution& d, int n, std::uint64_t seed) {
                std::mt19937_64 rng(seed);
                return d.sample(rng, n);
            },
            "n"_a, "seed"_a)
        .def("__str__", &CostDistribution::to_string)
        .def("__repr__", [](const CostDistribution& d) { return "CostDistribution('" + d.to_string() + "')"; });

    m.def("floor_contribution", &floor_contribution, "c"_a, "p"_a);
    m.def("gamma_star", &gamma_star, "c"_a, "p"_a, "d"_a);
    m.def("max_fill", &max_fill, "c"_a, "V"_a, "p"_a);
    m.def("water_fill", &water_fill_list, "costs"_a, "lower"_a, "upper"_a, "demand"_a);
    m.def("reaches_threshold", &reaches_threshold, "aggregate"_a, "X"_a);

    py::class_<MechanismOutcome>(m, "MechanismOutcome")
        .def_readonly("e", &MechanismOutcome::e)
        .def_readonly("success", &MechanismOutcome::success)
        .def_readonly("privacy_cost_total", &MechanismOutcome::privacy_cost_total)
        .def_readonly("user_payoffs", &MechanismOutcome::user_payoffs)
        .def_readonly("provider_payoff", &MechanismOutcome::provider_payoff)
        .def_readonly("subsidy_paid", &MechanismOutcome::subsidy_paid)
        .def_readonly("backstop_pool_size", &MechanismOutcome::backstop_pool_size)
        .def_property_readonly("aggregate", &MechanismOutcome::aggregate);

    m.def(
        "social_welfare",
        [](const std::vector<double>& costs, const MechanismOutcome& o, const Params& p) {
            return social_welfare(costs, o, p);
        },
        "costs"_a, "outcome"_a, "params"_a);

    py::enum_<Protocol>(m, "Protocol")
        .value("C", Protocol::C)
        .value("S", Protocol::S)
        .value("M", Protocol::M)
        .value("L", Protocol::L);

    py::enum_<PlanKind>(m, "PlanKind")
        .value("null", PlanKind::null)
        .value("floor_only", PlanKind::floor_only)
        .value("backstop", PlanKind::backstop);

    py::class_<AssignmentPlan>(m, "AssignmentPlan")
        .def_readonly("kind", &AssignmentPlan::kind)
        .def_readonly("pool", &AssignmentPlan::pool)
        .def_readonly("residual", &AssignmentPlan::residual)
        .def_readonly("outside_floor", &AssignmentPlan::outside_floor)
        .def_readonly("floors", &AssignmentPlan::floors)
        .def_readonly("targets", &AssignmentPlan::targets);

    m.def(
        "build_pool", [](const std::vector<double>& c, const Params& p) { return build_pool(c, p); }, "costs"_a,
        "params"_a);

    py::class_<ProtocolOutcome>(m, "ProtocolOutcome")
        .def_readonly("e", &ProtocolOutcome::e)
        .def_readonly("success", &ProtocolOutcome::success)
        .def_readonly("binding_user", &ProtocolOutcome::binding_user)
        .def_readonly("pool_size", &ProtocolOutcome::pool_size)
        .def_readonly("plan", &ProtocolOutcome::plan);

    m.def(
        "protocol_outcome",
        [](Protocol proto, const std::vector<double>& c, const Params& p) { return protocol_outcome(proto, c, p); },
        "protocol"_a, "costs"_a, "params"_a);
    m.def(
        "noisy_plan_outcome",
        [](const std::vector<double>& truth, const std::vector<double>& observed, const Params& p, Protocol proto) {
            return noisy_plan_outcome(truth, observed, p, proto);
        },
        "costs_true"_a, "costs_observed"_a, "params"_a, "protocol"_a);

    py::enum_<PivotalMode>(m, "PivotalMode")
        .value("closed_form", PivotalMode::closed_form)
        .value("monte_carlo", PivotalMode::monte_carlo);

    py::class_<CutoffSearch>(m, "CutoffSearch")
        .def(py::init<>())
        .def_readwrite("grid_size", &CutoffSearch::grid_size)
        .def_readwrite("mode", &CutoffSearch::mode)
        .def_readwrite("mc_draws", &CutoffSearch::mc_draws)
        .def_readwrite("mc_seed", &CutoffSearch::mc_seed)
        .def_readwrite("refine_root", &CutoffSearch::refine_root);

    py::class_<CutoffSolution>(m, "CutoffSolution")
        .def_readonly("a_star", &CutoffSolution::a_star)
        .def_readonly("q_star", &CutoffSolution::q_star)
        .def_readonly("g_tilde", &CutoffSolution::g_tilde)
        .def_readonly("phi_value", &CutoffSolution::phi_value);

    m.def("g_tilde", &g_tilde_raw, "a"_a, "params"_a, "dist"_a);
    m.def("pivotal_prob_q", &pivotal_prob_q, "q"_a, "n"_a, "m"_a);
    m.def("phi", &phi, "a"_a, "params"_a, "dist"_a);
    m.def("select_cutoff", &select_cutoff, "params"_a, "dist"_a, "b0"_a, "search"_a = CutoffSearch{});
    m.def(
        "play_c",
        [](const std::vector<double>& c, const std::optional<CutoffSolution>& cut, const Params& p) {
            return play_c(c, cut, p);
        },
        "costs"_a, "cutoff"_a, "params"_a);

    py::class_<SweepConfig>(m, "SweepConfig")
        .def(py::init<>())
        .def_readwrite("n", &SweepConfig::n)
        .def_readwrite("X", &SweepConfig::X)
        .def_readwrite("pi", &SweepConfig::pi)
        .def_readwrite("v_grid", &SweepConfig::v_grid)
        .def_readwrite("p_grid", &SweepConfig::p_grid)
        .def_readwrite("n_mc", &SweepConfig::n_mc)
        .def_readwrite("master_seed", &SweepConfig::master_seed)
        .def_readwrite("dist", &SweepConfig::dist)
        .def_readwrite("b0", &SweepConfig::b0)
        .def_readwrite("tau", &SweepConfig::tau)
        .def_readwrite("mechanisms", &SweepConfig::mechanisms)
        .def_readwrite("cutoff", &SweepConfig::cutoff)
        .def_readwrite("diagnostics", &SweepConfig::diagnostics)
        .def_readwrite("min_common", &SweepConfig::min_common)
        .def_readwrite("threads", &SweepConfig::threads)
        .def("validate", &SweepConfig::validate);

    py::class_<MechStats>(m, "MechStats")
        .def_readonly("mechanism", &MechStats::mechanism)
        .def_readonly("n_mc", &MechStats::n_mc)
        .def_readonly("successes", &MechStats::successes)
        .def_readonly("success_prob", &MechStats::success_prob)
        .def_readonly("se", &MechStats::se)
        .def_readonly("ci95_half", &MechStats::ci95_half)
        .def_readonly("welfare_mean", &MechStats::welfare_mean)
        .def_readonly("welfare_se", &MechStats::welfare_se)
        .def_readonly("mean_subsidy", &MechStats::mean_subsidy)
        .def_readonly("mean_privacy_cost", &MechStats::mean_privacy_cost)
        .def_readonly("failed_with_contribution", &MechStats::failed_with_contribution);

    py::class_<PairedDiff>(m, "PairedDiff")
        .def_readonly("first", &PairedDiff::first)
        .def_readonly("second", &PairedDiff::second)
        .def_readonly("success_diff", &PairedDiff::success_diff)
        .def_readonly("success_se", &PairedDiff::success_se)
        .def_readonly("welfare_diff", &PairedDiff::welfare_diff)
        .def_readonly("welfare_se", &PairedDiff::welfare_se);

    py::class_<CostEfficiency>(m, "CostEfficiency")
        .def_readonly("prob_s_multi", &CostEfficiency::prob_s_multi)
        .def_readonly("prob_m_multi", &CostEfficiency::prob_m_multi)
        .def_readonly("gap", &CostEfficiency::gap)
        .def_readonly("common_count", &CostEfficiency::common_count);

    py::class_<ParetoStats>(m, "ParetoStats")
        .def_readonly("frac_no_worse", &ParetoStats::frac_no_worse)
        .def_readonly("mean_share_worse", &ParetoStats::mean_share_worse)
        .def_readonly("mean_compensation", &ParetoStats::mean_compensation);

    py::class_<CellStats>(m, "CellStats")
        .def_readonly("v", &CellStats::v)
        .def_readonly("p", &CellStats::p)
        .def_readonly("n_mc", &CellStats::n_mc)
        .def_readonly("cutoff", &CellStats::cutoff)
        .def_readonly("mechs", &CellStats::mechs)
        .def_readonly("pairs", &CellStats::pairs)
        .def_readonly("cost_efficiency", &CellStats::cost_efficiency)
        .def_readonly("pareto", &CellStats::pareto)
        .def("at", &CellStats::at, py::return_value_policy::reference_internal);

    m.def("sweep", &sweep, "config"_a, py::call_guard<py::gil_scoped_release>());
    m.def("run_cell", &run_cell, "v_index"_a, "p_index"_a, "config"_a, py::call_guard<py::gil_scoped_release>());

    m.def("golden_report", [] {
        std::ostringstream s;
        golden_report(s);
        return s.str();
    });
    m.def("run_cli", &cli, "args"_a, "Run the tpg_sim command line in-process; returns (code, stdout, stderr).");
}
