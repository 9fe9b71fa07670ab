#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tpg/assign.hpp"
#include "tpg/core.hpp"

namespace tpg {

// Stage-2 withdrawal protocols over a floor-plus-backstop plan.
//
//   S  simultaneous: water-filled targets, all backstoppers commit at once.
//   M  small-first:  backstoppers move highest cost first, lowest cost last.
//   L  large-first:  the reverse order of M.

enum class Protocol { C, S, M, L };

Protocol parse_protocol(std::string_view name);
std::string_view protocol_name(Protocol protocol);

struct ProtocolOutcome {
    std::vector<double> e;
    bool success = false;
    /// Pool member with the largest Gamma* at its target (S only, else -1).
    int binding_user = -1;
    /// Size of the pool the provider built, even if it then chose null.
    int pool_size = 0;
    /// Final plan; null when the provider withdrew the assignment.
    AssignmentPlan plan;

    MechanismOutcome to_mechanism_outcome(std::span<const double> costs,
                                          const Params& params) const;
};

ProtocolOutcome s_outcome(std::span<const double> costs, const Params& params);
ProtocolOutcome m_outcome(std::span<const double> costs, const Params& params);
ProtocolOutcome l_outcome(std::span<const double> costs, const Params& params);

/// S, M or L by enum. Throws std::invalid_argument for C.
ProtocolOutcome protocol_outcome(Protocol protocol, std::span<const double> costs,
                                 const Params& params);

/// The provider plans from observed costs; users decide on their true costs.
///
/// Users outside the pool keep min(assigned floor, true floor). Under S a
/// backstopper keeps its target iff it is willing at its true cost, else it
/// drops to its true floor. Under M and L outsiders move first, then each
/// mover covers what the announced downstream capacity (from observed costs)
/// leaves open, or drops to its true floor when that exceeds its true
/// capacity. A failed draw keeps whatever was retained.
ProtocolOutcome noisy_plan_outcome(std::span<const double> costs_true,
                                   std::span<const double> costs_observed, const Params& params,
                                   Protocol protocol);

}  // namespace tpg
