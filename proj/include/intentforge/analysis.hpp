#pragma once

// Prediction-quality analysis against map conformance: displacement metrics,
// ground-truth deviation from the road graph, dataset filtering and smoothed
// minFDE-vs-deviation curves.

#include <span>
#include <string>
#include <vector>

#include "intentforge/intention.hpp"
#include "intentforge/lane_assoc.hpp"
#include "intentforge/map_model.hpp"
#include "intentforge/road_graph.hpp"

namespace intentforge {

inline constexpr double kImplausibleSpeed = 60.0;       // m/s between consecutive steps
inline constexpr double kParkedDisplacement = 1.0;      // m over the 8 s horizon
inline constexpr std::size_t kDefaultSmoothingWindow = 7500;

struct PredictedMode {
  double confidence = 0.0;
  std::vector<Vec2> points;  // kFutureSteps, global frame
};

struct PredictionSet {
  AgentId agent_id = 0;
  std::vector<PredictedMode> modes;  // at most 6

  /// Throws std::invalid_argument on a broken invariant.
  void validate() const;
};

enum class Horizon { s3, s5, s8 };

/// Future-array index of the horizon: 29, 49 or 79.
int horizon_step(Horizon h);

/// Miss-rate thresholds of the Waymo motion benchmark.
struct MissThresholds {
  double lateral = 0.0;
  double longitudinal = 0.0;
};
MissThresholds miss_thresholds(Horizon h);

/// Threshold scale from the agent's current speed: 0.5 below 1.4 m/s, 1.0
/// above 11 m/s, linear in between.
double miss_speed_scale(double speed);

/// Throws std::invalid_argument when the ground truth at the horizon is invalid.
double min_fde(const PredictionSet& pred, const AgentTrack& gt, Horizon h);

/// Mean displacement over the valid ground-truth steps up to the horizon,
/// minimized over modes. Throws when no step is valid.
double min_ade(const PredictionSet& pred, const AgentTrack& gt, Horizon h);

/// 0 when some mode's endpoint lies inside the threshold box around the
/// ground-truth endpoint (oriented by its heading, boundary inclusive), else 1.
int miss_rate(const PredictionSet& pred, const AgentTrack& gt, Horizon h);

enum class DeviationMode { node, polyline };

std::string_view to_string(DeviationMode mode);
std::optional<DeviationMode> parse_deviation_mode(std::string_view s);

/// Distance from the 8 s ground-truth endpoint to the reachable road graph.
/// Node mode measures to reachable nodes; polyline mode to the lane pieces
/// between consecutive reachable nodes of the same segment (isolated nodes
/// count as points). Throws for an empty reach set or invalid endpoint.
double gt_deviation(const AgentTrack& gt, const ReachabilitySet& reach, const RoadGraph& graph,
                    DeviationMode mode = DeviationMode::node);

/// True when the net displacement between the current position and the last
/// valid future position is below 1 m.
bool detect_parked(const AgentTrack& track);

/// True when the 8 s state is valid and no pair of consecutive valid states
/// (current state included) implies more than 60 m/s.
bool plausible_ground_truth(const AgentTrack& track);

struct FilterReport {
  std::size_t total = 0;
  std::size_t excluded_non_vehicle = 0;
  std::size_t excluded_no_dynamic = 0;
  std::size_t excluded_invalid_gt = 0;
  std::size_t remaining = 0;

  bool consistent() const {
    return total == remaining + excluded_non_vehicle + excluded_no_dynamic + excluded_invalid_gt;
  }
};

struct FilteredAgent {
  std::size_t scenario_index = 0;
  AgentId agent_id = 0;
  AssociationResult association;
};

struct FilterResult {
  std::vector<FilteredAgent> agents;  // input order
  FilterReport report;
};

/// Keeps the predicted vehicles that admit dynamic intention points and have
/// plausible ground truth. Checks apply in that order; each excluded agent
/// is counted once under the first failing rule.
FilterResult filter_dataset(std::span<const Scenario> scenarios, const AssocConfig& cfg = {});

/// Trailing moving average; output length is size - window + 1. Throws
/// std::invalid_argument for window 0 or window > size.
std::vector<double> moving_average(std::span<const double> values, std::size_t window);

struct DeviationRecord {
  std::string scenario_id;
  AgentId agent_id = 0;
  double deviation = 0.0;
  std::vector<double> min_fde_8s;  // one per model
  bool parked = false;
};

struct CurveRow {
  std::size_t rank = 0;  // index in deviation order of the window's last record
  double deviation = 0.0;
  std::vector<double> smoothed_min_fde;
};

struct DeviationCurve {
  std::vector<std::string> models;
  std::vector<CurveRow> rows;
};

/// Sorts records by deviation (ties by scenario id, agent id) and smooths
/// each model's minFDE with a trailing window. Throws std::invalid_argument
/// when the window exceeds the remaining record count.
DeviationCurve deviation_curve(std::vector<DeviationRecord> records,
                               std::span<const std::string> models, std::size_t window,
                               bool exclude_parked = false);

/// Distance from the agent-frame endpoint to the nearest intention point.
double coverage(const IntentionPointSet& points, Vec2 gt_endpoint);

}  // namespace intentforge
