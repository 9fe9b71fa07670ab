#include "tpg/assign.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "tpg/primitives.hpp"

namespace tpg {

std::vector<std::size_t> ascending_cost_order(std::span<const double> costs) {
    std::vector<std::size_t> order(costs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
    return order;
}

namespace {

// outside[k] = sum of floors of order[k..n), summed from the high-cost end.
std::vector<double> outside_floor_sums(const std::vector<std::size_t>& order,
                                       const std::vector<double>& floors) {
    std::vector<double> outside(order.size() + 1, 0.0);
    for (std::size_t k = order.size(); k-- > 0;) outside[k] = outside[k + 1] + floors[order[k]];
    return outside;
}

std::vector<double> floor_vector(std::span<const double> costs, double p) {
    std::vector<double> floors(costs.size());
    for (std::size_t i = 0; i < costs.size(); ++i) floors[i] = floor_contribution(costs[i], p);
    return floors;
}

}  // namespace

double residual_demand(std::span<const double> costs, const Params& params, int k) {
    if (k < 0 || static_cast<std::size_t>(k) > costs.size())
        throw std::out_of_range("pool size out of range");
    const auto order = ascending_cost_order(costs);
    const auto outside = outside_floor_sums(order, floor_vector(costs, params.p));
    return params.X - outside[static_cast<std::size_t>(k)];
}

AssignmentPlan null_plan(std::size_t n) {
    AssignmentPlan plan;
    plan.kind = PlanKind::null;
    plan.floors.assign(n, 0.0);
    plan.targets.assign(n, 0.0);
    return plan;
}

AssignmentPlan build_pool(std::span<const double> costs, const Params& params) {
    const std::size_t n = costs.size();
    AssignmentPlan plan;
    plan.order = ascending_cost_order(costs);
    plan.floors = floor_vector(costs, params.p);
    const auto outside = outside_floor_sums(plan.order, plan.floors);

    if (reaches_threshold(outside[0], params.X)) {
        plan.kind = PlanKind::floor_only;
        plan.outside_floor = outside[0];
        plan.residual = params.X - outside[0];
        plan.targets = plan.floors;
        return plan;
    }
    for (std::size_t k = 1; k <= n; ++k) {
        const double demand = params.X - outside[k];
        if (demand <= static_cast<double>(k)) {
            plan.kind = PlanKind::backstop;
            plan.pool.assign(plan.order.begin(), plan.order.begin() + static_cast<std::ptrdiff_t>(k));
            plan.residual = demand;
            plan.outside_floor = outside[k];
            plan.targets = plan.floors;
            for (auto i : plan.pool) plan.targets[i] = 1.0;
            return plan;
        }
    }
    auto none = null_plan(n);
    none.order = std::move(plan.order);
    none.floors = std::move(plan.floors);
    return none;
}

AssignmentPlan with_pool_targets(AssignmentPlan plan, std::span<const double> pool_targets) {
    if (pool_targets.size() != plan.pool.size())
        throw std::invalid_argument("pool target count does not match the pool");
    for (std::size_t j = 0; j < plan.pool.size(); ++j) plan.targets[plan.pool[j]] = pool_targets[j];
    return plan;
}

AssignmentPlan null_or_assign(AssignmentPlan plan, bool protocol_feasible,
                              std::span<const double> previewed_retentions, const Params& params) {
    const std::size_t n = plan.targets.size();
    if (!plan.positive() || !protocol_feasible) return null_plan(n);
    if (params.enforce_provider_profit) {
        const double paid =
            params.p * std::accumulate(previewed_retentions.begin(), previewed_retentions.end(), 0.0);
        if (params.pi * params.V < paid) return null_plan(n);
    }
    return plan;
}

}  // namespace tpg
