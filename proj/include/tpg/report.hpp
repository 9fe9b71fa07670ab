#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tpg/engine.hpp"

namespace tpg {

/// A labelled sweep. The label prefixes every file the run writes.
struct LabelledRun {
    std::string label;
    SweepConfig config;
};

/// Raised when an output file cannot be written or an input cannot be read.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// "%.12g" with negative zero folded to zero.
std::string format_number(double value);
std::string format_optional(const std::optional<double>& value);

void write_mechanism_csv(std::ostream& os, const std::vector<CellStats>& cells, Protocol mechanism);
void write_pairs_csv(std::ostream& os, const std::vector<CellStats>& cells);
void write_cost_csv(std::ostream& os, const std::vector<CellStats>& cells);
void write_pareto_csv(std::ostream& os, const std::vector<CellStats>& cells);

/// Writes every CSV for one run into `dir` and returns the file names.
std::vector<std::string> write_run(const std::filesystem::path& dir, const LabelledRun& run,
                                   const std::vector<CellStats>& cells);

nlohmann::json config_to_json(const SweepConfig& config);
/// Throws ConfigError naming the field that is missing or malformed.
SweepConfig config_from_json(const nlohmann::json& j);

struct RunManifest {
    std::string version;
    std::string created;  // UTC, ISO 8601
    std::string preset;
    std::vector<LabelledRun> runs;
    std::vector<std::vector<std::string>> outputs;  // per run

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

std::string utc_timestamp();

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace tpg
