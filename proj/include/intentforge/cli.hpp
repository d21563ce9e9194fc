#pragma once

// The intentforge command-line tool as a library entry point.
//
//   gen             write synthetic scenario files
//   intents         per-agent intention points (static | dynamic | mixed)
//   analyze         deviation curve, filter report, coverage, mix-ratio table
//   dump-roadgraph  arrival times over one scenario's lane graph
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage or config error.

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "intentforge/analysis.hpp"
#include "intentforge/intention.hpp"
#include "intentforge/kmeans.hpp"
#include "intentforge/lane_assoc.hpp"
#include "intentforge/road_graph.hpp"

namespace intentforge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AnalysisOptions {
  std::size_t window = kDefaultSmoothingWindow;
  DeviationMode deviation_mode = DeviationMode::node;
  bool exclude_parked = false;
};

struct RunConfig {
  AssocConfig assoc;
  GraphConfig graph;
  KMeansConfig kmeans;  // kmeans.seed is the run seed
  MixConfig mix;
  AnalysisOptions analysis;
  int jobs = 1;

  /// Throws ConfigError.
  void validate() const;
};

/// Built-in defaults with INTENTFORGE_SEED applied. Throws ConfigError for
/// an unparsable seed.
RunConfig default_run_config();

/// Overlays a JSON config:
///
///   {"seed": 0, "jobs": 1,
///    "assoc": {"heading_threshold_deg": 45, "proximity_limit_m": 5, "backwards_look_m": 10},
///    "graph": {"time_budget_s": 8, "speed_offset_mps": 6.7056},
///    "kmeans": {"k": 64, "max_iterations": 100, "tolerance_m": 1e-6},
///    "mix": {"dynamic_weight": 3, "static_weight": 1},
///    "analysis": {"window": 7500, "deviation_mode": "node", "exclude_parked": false}}
///
/// Every key is optional; unknown keys are rejected. Throws ConfigError.
void apply_config_json(RunConfig& cfg, std::string_view json);

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace intentforge
