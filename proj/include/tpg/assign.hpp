#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tpg/core.hpp"

namespace tpg {

// Stage-1 provider logic: floor-plus-backstop pool construction and the
// null-assignment screen.

enum class PlanKind { null, floor_only, backstop };

struct AssignmentPlan {
    PlanKind kind = PlanKind::null;
    /// All users by ascending cost, ties by index.
    std::vector<std::size_t> order;
    /// The k lowest-cost users (prefix of `order`); empty unless backstop.
    std::vector<std::size_t> pool;
    /// D_K = X minus the floors of users outside the pool.
    double residual = 0.0;
    /// Aggregate floor of users outside the pool.
    double outside_floor = 0.0;
    std::vector<double> floors;
    /// Notional assignment g_i per user. Pool members hold 1 until a
    /// protocol attaches its split.
    std::vector<double> targets;

    int pool_size() const { return static_cast<int>(pool.size()); }
    bool positive() const { return kind != PlanKind::null; }
};

/// Indices sorted by ascending cost, ties broken by index.
std::vector<std::size_t> ascending_cost_order(std::span<const double> costs);

/// Residual demand if the k lowest-cost users form the pool.
double residual_demand(std::span<const double> costs, const Params& params, int k);

/// Smallest pool of lowest-cost users whose residual demand fits (D_K <= k).
AssignmentPlan build_pool(std::span<const double> costs, const Params& params);

/// Replaces the pool members' targets with a protocol split (pool order).
AssignmentPlan with_pool_targets(AssignmentPlan plan, std::span<const double> pool_targets);

AssignmentPlan null_plan(std::size_t n);

/// Null when the protocol cannot sustain provision or, with the provider
/// profitability screen on, when pi V < p sum(e) on the previewed retentions.
AssignmentPlan null_or_assign(AssignmentPlan plan, bool protocol_feasible,
                              std::span<const double> previewed_retentions, const Params& params);

}  // namespace tpg
