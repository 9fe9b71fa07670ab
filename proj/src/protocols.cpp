#include "tpg/protocols.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "tpg/primitives.hpp"

namespace tpg {

Protocol parse_protocol(std::string_view name) {
    if (name == "C") return Protocol::C;
    if (name == "S") return Protocol::S;
    if (name == "M") return Protocol::M;
    if (name == "L") return Protocol::L;
    throw ConfigError("mech", "unknown mechanism '" + std::string(name) + "' (expected C, S, M or L)");
}

std::string_view protocol_name(Protocol protocol) {
    switch (protocol) {
        case Protocol::C: return "C";
        case Protocol::S: return "S";
        case Protocol::M: return "M";
        case Protocol::L: return "L";
    }
    return "?";
}

MechanismOutcome ProtocolOutcome::to_mechanism_outcome(std::span<const double> costs,
                                                       const Params& params) const {
    return make_outcome(costs, e, params, pool_size);
}

namespace {

struct ChainResult {
    std::vector<double> retained;  // per mover, chain order
    double aggregate = 0.0;
    bool sustained = true;         // no mover had to drop out
};

// One pass of a sequential withdrawal chain. Mover j keeps the least amount
// that leaves at most `cap_after[j]` for the movers after it, never below
// `lower[j]`; if that exceeds `upper[j]` it drops to `lower[j]`.
ChainResult run_chain(std::span<const double> lower, std::span<const double> upper,
                      std::span<const double> cap_after, double start, double X) {
    ChainResult out;
    out.retained.resize(lower.size());
    double aggregate = start;
    for (std::size_t j = 0; j < lower.size(); ++j) {
        const double need = X - aggregate - cap_after[j];
        double keep = std::max(lower[j], need);
        if (keep > upper[j] + kEpsNum) {
            keep = lower[j];
            out.sustained = false;
        } else if (keep > upper[j]) {
            keep = upper[j];
        }
        out.retained[j] = keep;
        aggregate += keep;
    }
    out.aggregate = aggregate;
    return out;
}

std::vector<double> suffix_capacity(std::span<const double> upper) {
    std::vector<double> cap(upper.size(), 0.0);
    double acc = 0.0;
    for (std::size_t j = upper.size(); j-- > 0;) {
        cap[j] = acc;
        acc += upper[j];
    }
    return cap;
}

ProtocolOutcome null_result(int pool_size, std::size_t n) {
    ProtocolOutcome out;
    out.e.assign(n, 0.0);
    out.success = false;
    out.pool_size = pool_size;
    out.plan = null_plan(n);
    return out;
}

// Users outside the pool keep the smaller of their assignment and true floor.
double settle_outsiders(const AssignmentPlan& plan, std::span<const double> truth,
                        const Params& params, std::vector<double>& e) {
    std::vector<char> in_pool(truth.size(), 0);
    for (auto i : plan.pool) in_pool[i] = 1;
    double total = 0.0;
    // Sum from the high-cost end to match the plan's own floor aggregate.
    for (std::size_t r = plan.order.size(); r-- > 0;) {
        const auto i = plan.order[r];
        if (in_pool[i]) continue;
        e[i] = std::min(plan.targets[i], floor_contribution(truth[i], params.p));
        total += e[i];
    }
    return total;
}

ProtocolOutcome floor_only_result(AssignmentPlan plan, std::span<const double> truth,
                                  const Params& params) {
    const std::size_t n = truth.size();
    const auto preview = plan.targets;
    auto screened = null_or_assign(std::move(plan), true, preview, params);
    if (!screened.positive()) return null_result(0, n);
    ProtocolOutcome out;
    out.e.assign(n, 0.0);
    const double total = settle_outsiders(screened, truth, params, out.e);
    out.success = reaches_threshold(total, params.X);
    out.pool_size = 0;
    out.plan = std::move(screened);
    return out;
}

ProtocolOutcome simultaneous(std::span<const double> truth, std::span<const double> observed,
                             const Params& params) {
    const std::size_t n = truth.size();
    auto plan = build_pool(observed, params);
    if (plan.kind == PlanKind::floor_only) return floor_only_result(std::move(plan), truth, params);
    if (plan.kind == PlanKind::null) return null_result(0, n);

    const int k = plan.pool_size();
    WaterFillProblem problem;
    problem.demand = plan.residual;
    for (auto i : plan.pool) {
        problem.costs.push_back(observed[i]);
        problem.lower.push_back(plan.floors[i]);
        problem.upper.push_back(1.0);
    }
    const auto split = water_fill(problem).allocation;

    int binding = -1;
    double worst = -1.0;
    bool feasible = true;
    for (int j = 0; j < k; ++j) {
        const auto i = plan.pool[static_cast<std::size_t>(j)];
        const double g = gamma_star(observed[i], params.p, split[static_cast<std::size_t>(j)]);
        if (g > worst) {
            worst = g;
            binding = static_cast<int>(i);
        }
        feasible = feasible && willing_to_retain(observed[i], params.V, params.p,
                                                 split[static_cast<std::size_t>(j)]);
    }
    auto planned = with_pool_targets(std::move(plan), split);
    const auto preview_targets = planned.targets;
    planned = null_or_assign(std::move(planned), feasible, preview_targets, params);
    if (!planned.positive()) {
        auto out = null_result(k, n);
        out.binding_user = binding;
        return out;
    }

    ProtocolOutcome out;
    out.e.assign(n, 0.0);
    double total = settle_outsiders(planned, truth, params, out.e);
    for (auto i : planned.pool) {
        const double target = planned.targets[i];
        const double own_floor = floor_contribution(truth[i], params.p);
        const bool keeps = target <= own_floor || willing_to_retain(truth[i], params.V, params.p, target);
        out.e[i] = keeps ? target : own_floor;
        total += out.e[i];
    }
    out.success = reaches_threshold(total, params.X);
    out.binding_user = binding;
    out.pool_size = k;
    out.plan = std::move(planned);
    return out;
}

ProtocolOutcome sequential(std::span<const double> truth, std::span<const double> observed,
                           const Params& params, bool small_first) {
    const std::size_t n = truth.size();
    auto plan = build_pool(observed, params);
    if (plan.kind == PlanKind::floor_only) return floor_only_result(std::move(plan), truth, params);
    if (plan.kind == PlanKind::null) return null_result(0, n);

    const int k = plan.pool_size();
    // plan.pool is ascending in observed cost; M reverses it.
    std::vector<std::size_t> movers(plan.pool.begin(), plan.pool.end());
    if (small_first) std::reverse(movers.begin(), movers.end());

    std::vector<double> lower_obs(movers.size()), upper_obs(movers.size());
    for (std::size_t j = 0; j < movers.size(); ++j) {
        lower_obs[j] = plan.floors[movers[j]];
        upper_obs[j] = max_fill(observed[movers[j]], params.V, params.p);
    }
    const auto cap_after = suffix_capacity(upper_obs);
    const auto preview = run_chain(lower_obs, upper_obs, cap_after, plan.outside_floor, params.X);

    std::vector<double> pool_targets(movers.size());
    for (std::size_t j = 0; j < movers.size(); ++j) {
        const std::size_t pos = small_first ? movers.size() - 1 - j : j;
        pool_targets[pos] = preview.retained[j];
    }
    const bool feasible = preview.sustained && reaches_threshold(preview.aggregate, params.X);
    auto planned = with_pool_targets(std::move(plan), pool_targets);
    const auto preview_targets = planned.targets;
    planned = null_or_assign(std::move(planned), feasible, preview_targets, params);
    if (!planned.positive()) return null_result(k, n);

    ProtocolOutcome out;
    out.e.assign(n, 0.0);
    const double start = settle_outsiders(planned, truth, params, out.e);
    std::vector<double> lower_true(movers.size()), upper_true(movers.size());
    for (std::size_t j = 0; j < movers.size(); ++j) {
        lower_true[j] = floor_contribution(truth[movers[j]], params.p);
        upper_true[j] = max_fill(truth[movers[j]], params.V, params.p);
    }
    const auto played = run_chain(lower_true, upper_true, cap_after, start, params.X);
    for (std::size_t j = 0; j < movers.size(); ++j) out.e[movers[j]] = played.retained[j];
    out.success = reaches_threshold(played.aggregate, params.X);
    out.pool_size = k;
    out.plan = std::move(planned);
    return out;
}

}  // namespace

ProtocolOutcome s_outcome(std::span<const double> costs, const Params& params) {
    return simultaneous(costs, costs, params);
}

ProtocolOutcome m_outcome(std::span<const double> costs, const Params& params) {
    return sequential(costs, costs, params, true);
}

ProtocolOutcome l_outcome(std::span<const double> costs, const Params& params) {
    return sequential(costs, costs, params, false);
}

ProtocolOutcome protocol_outcome(Protocol protocol, std::span<const double> costs,
                                 const Params& params) {
    switch (protocol) {
        case Protocol::S: return s_outcome(costs, params);
        case Protocol::M: return m_outcome(costs, params);
        case Protocol::L: return l_outcome(costs, params);
        case Protocol::C: break;
    }
    throw std::invalid_argument("mechanism C has no withdrawal protocol");
}

ProtocolOutcome noisy_plan_outcome(std::span<const double> costs_true,
                                   std::span<const double> costs_observed, const Params& params,
                                   Protocol protocol) {
    if (costs_true.size() != costs_observed.size())
        throw std::invalid_argument("true and observed cost vectors differ in length");
    switch (protocol) {
        case Protocol::S: return simultaneous(costs_true, costs_observed, params);
        case Protocol::M: return sequential(costs_true, costs_observed, params, true);
        case Protocol::L: return sequential(costs_true, costs_observed, params, false);
        case Protocol::C: break;
    }
    throw std::invalid_argument("mechanism C has no withdrawal protocol");
}

}  // namespace tpg
