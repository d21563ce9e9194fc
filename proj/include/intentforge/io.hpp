#pragma once

// File helpers shared by the command-line tool: scenario corpora, point
// lists and per-model prediction tables.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "intentforge/analysis.hpp"
#include "intentforge/map_model.hpp"

namespace intentforge {

/// Missing or unreadable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

/// Every path is a scenario file or a directory of `*.json` files. The
/// result is sorted by scenario id; duplicate ids are an error.
std::vector<Scenario> load_scenarios(std::span<const std::string> paths);

/// `x,y` CSV with a header row.
std::vector<Vec2> read_points_csv(const std::filesystem::path& path);
std::string points_csv(std::span<const Vec2> points);

/// Predictions keyed by (scenario id, agent id). The scenario id is empty
/// when the table has no scenario_id column.
using PredictionKey = std::pair<std::string, AgentId>;
using PredictionTable = std::map<PredictionKey, PredictionSet>;

/// Columns `[scenario_id,]agent_id,mode_idx,confidence,step,x,y`, one row per
/// mode and future step. Throws ScenarioError(schema) on malformed input.
PredictionTable parse_predictions_csv(std::string_view text);
std::string predictions_csv(std::span<const std::pair<std::string, PredictionSet>> sets);

/// Lookup by (scenario id, agent id), then by agent id alone.
const PredictionSet* find_prediction(const PredictionTable& table, const std::string& scenario_id,
                                     AgentId agent_id);

}  // namespace intentforge
