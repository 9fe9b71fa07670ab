#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tpg/report.hpp"

namespace tpg {

/// "lo:hi:count", inclusive endpoints. Throws ConfigError naming `field`.
std::vector<double> parse_grid(std::string_view text, const std::string& field);

/// "C,S,M" style list. Throws ConfigError("mech").
std::vector<Protocol> parse_mechanisms(std::string_view text);

/// Runs a named preset expands into, starting from `base`.
std::vector<LabelledRun> preset_runs(const std::string& name, const SweepConfig& base);

/// Human-readable walk-through of the three-user worked instance.
void golden_report(std::ostream& os);

/// Exit status: 0 ok, 1 I/O failure, 2 configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tpg
