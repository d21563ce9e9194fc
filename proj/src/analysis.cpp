#include "intentforge/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "intentforge/kernels.hpp"

namespace intentforge {

namespace {

const AgentState& gt_at(const AgentTrack& gt, Horizon h) {
  const int step = horizon_step(h);
  if (gt.future.size() <= static_cast<std::size_t>(step) || !gt.future[step].valid) {
    throw std::invalid_argument("ground truth invalid at horizon step " + std::to_string(step));
  }
  return gt.future[step];
}

void require_modes(const PredictionSet& pred, Horizon h) {
  if (pred.modes.empty()) throw std::invalid_argument("prediction set has no modes");
  const auto need = static_cast<std::size_t>(horizon_step(h)) + 1;
  for (const auto& m : pred.modes) {
    if (m.points.size() < need) throw std::invalid_argument("predicted trajectory too short");
  }
}

// Neumaier-compensated running sum supporting removal.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace

void PredictionSet::validate() const {
  if (modes.size() > 6) throw std::invalid_argument("at most 6 modes");
  double total = 0.0;
  for (const auto& m : modes) {
    if (m.confidence < 0.0 || m.confidence > 1.0) {
      throw std::invalid_argument("confidence outside [0, 1]");
    }
    if (m.points.size() != static_cast<std::size_t>(kFutureSteps)) {
      throw std::invalid_argument("each mode needs " + std::to_string(kFutureSteps) + " points");
    }
    total += m.confidence;
  }
  if (total > 1.0 + 1e-6) throw std::invalid_argument("confidences sum above 1");
}

int horizon_step(Horizon h) {
  switch (h) {
    case Horizon::s3:
      return 29;
    case Horizon::s5:
      return 49;
    case Horizon::s8:
      return 79;
  }
  return 79;
}

MissThresholds miss_thresholds(Horizon h) {
  switch (h) {
    case Horizon::s3:
      return {1.0, 2.0};
    case Horizon::s5:
      return {1.8, 3.6};
    case Horizon::s8:
      return {3.0, 6.0};
  }
  return {3.0, 6.0};
}

double miss_speed_scale(double speed) {
  constexpr double kLowerSpeed = 1.4;
  constexpr double kUpperSpeed = 11.0;
  constexpr double kLowerScale = 0.5;
  constexpr double kUpperScale = 1.0;
  speed = std::abs(speed);
  if (speed < kLowerSpeed) return kLowerScale;
  if (speed > kUpperSpeed) return kUpperScale;
  const double fraction = (speed - kLowerSpeed) / (kUpperSpeed - kLowerSpeed);
  return kLowerScale + (kUpperScale - kLowerScale) * fraction;
}

double min_fde(const PredictionSet& pred, const AgentTrack& gt, Horizon h) {
  const AgentState& target = gt_at(gt, h);
  require_modes(pred, h);
  const int step = horizon_step(h);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : pred.modes) best = std::min(best, distance(m.points[step], target.position));
  return best;
}

double min_ade(const PredictionSet& pred, const AgentTrack& gt, Horizon h) {
  require_modes(pred, h);
  const int step = horizon_step(h);
  int valid = 0;
  for (int i = 0; i <= step; ++i) valid += gt.future[i].valid ? 1 : 0;
  if (valid == 0) throw std::invalid_argument("no valid ground-truth steps up to the horizon");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : pred.modes) {
    double sum = 0.0;
    for (int i = 0; i <= step; ++i) {
      if (gt.future[i].valid) sum += distance(m.points[i], gt.future[i].position);
    }
    best = std::min(best, sum / valid);
  }
  return best;
}

int miss_rate(const PredictionSet& pred, const AgentTrack& gt, Horizon h) {
  const AgentState& target = gt_at(gt, h);
  require_modes(pred, h);
  const int step = horizon_step(h);
  const MissThresholds thr = miss_thresholds(h);
  const double scale = miss_speed_scale(gt.current().speed);
  for (const auto& m : pred.modes) {
    const Vec2 d = rotate(m.points[step] - target.position, -target.heading);
    const double lateral = d.y / scale;
    const double longitudinal = d.x / scale;
    if (std::abs(lateral) <= thr.lateral && std::abs(longitudinal) <= thr.longitudinal) return 0;
  }
  return 1;
}

std::string_view to_string(DeviationMode mode) {
  return mode == DeviationMode::node ? "node" : "polyline";
}

std::optional<DeviationMode> parse_deviation_mode(std::string_view s) {
  if (s == "node") return DeviationMode::node;
  if (s == "polyline") return DeviationMode::polyline;
  return std::nullopt;
}

double gt_deviation(const AgentTrack& gt, const ReachabilitySet& reach, const RoadGraph& graph,
                    DeviationMode mode) {
  if (reach.entries.empty()) throw std::invalid_argument("gt_deviation: empty reachability set");
  const AgentState& end = gt_at(gt, Horizon::s8);
  const Vec2 p = end.position;

  std::vector<double> xs, ys;
  xs.reserve(reach.entries.size());
  ys.reserve(reach.entries.size());
  for (const auto& e : reach.entries) {
    xs.push_back(e.position.x);
    ys.push_back(e.position.y);
  }
  const double node_dist = std::sqrt(kernels::nearest_point(p.x, p.y, xs, ys).squared_distance);
  if (mode == DeviationMode::node) return node_dist;

  std::vector<char> reachable(graph.node_count(), 0);
  for (const auto& e : reach.entries) reachable[e.index] = 1;
  double best = node_dist;
  for (const auto& e : reach.entries) {
    const std::size_t next = e.index + 1;
    if (next < graph.node_count() && reachable[next] &&
        graph.node(next).segment == e.node.segment) {
      best = std::min(best, point_to_segment_distance(p, e.position, graph.position(next)));
    }
  }
  return best;
}

bool detect_parked(const AgentTrack& track) {
  const AgentState* last = nullptr;
  for (auto it = track.future.rbegin(); it != track.future.rend(); ++it) {
    if (it->valid) {
      last = &*it;
      break;
    }
  }
  if (!last) return true;
  return distance(last->position, track.current().position) < kParkedDisplacement;
}

bool plausible_ground_truth(const AgentTrack& track) {
  if (track.future.size() != static_cast<std::size_t>(kFutureSteps) || !track.future.back().valid) {
    return false;
  }
  const AgentState* prev = &track.current();
  int prev_step = 0;
  for (int i = 0; i < kFutureSteps; ++i) {
    const AgentState& st = track.future[i];
    if (!st.valid) continue;
    const double dt = (i + 1 - prev_step) / static_cast<double>(kStepsPerSecond);
    if (distance(st.position, prev->position) / dt > kImplausibleSpeed) return false;
    prev = &st;
    prev_step = i + 1;
  }
  return true;
}

FilterResult filter_dataset(std::span<const Scenario> scenarios, const AssocConfig& cfg) {
  FilterResult out;
  for (std::size_t si = 0; si < scenarios.size(); ++si) {
    const Scenario& s = scenarios[si];
    for (AgentId id : s.tracks_to_predict) {
      ++out.report.total;
      const AgentTrack* t = s.find_track(id);
      if (!t || t->object_class != ObjectClass::vehicle) {
        ++out.report.excluded_non_vehicle;
        continue;
      }
      AssociationResult assoc = associate(s.map, *t, cfg);
      if (assoc.fallback) {
        ++out.report.excluded_no_dynamic;
        continue;
      }
      if (!plausible_ground_truth(*t)) {
        ++out.report.excluded_invalid_gt;
        continue;
      }
      ++out.report.remaining;
      out.agents.push_back({si, id, std::move(assoc)});
    }
  }
  return out;
}

std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be >= 1");
  if (window > values.size()) {
    throw std::invalid_argument("window " + std::to_string(window) + " exceeds length " +
                                std::to_string(values.size()));
  }
  std::vector<double> out;
  out.reserve(values.size() - window + 1);
  CompensatedSum sum;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum.add(values[i]);
    if (i >= window) sum.add(-values[i - window]);
    if (i + 1 >= window) out.push_back(sum.value() / static_cast<double>(window));
  }
  return out;
}

DeviationCurve deviation_curve(std::vector<DeviationRecord> records,
                               std::span<const std::string> models, std::size_t window,
                               bool exclude_parked) {
  if (exclude_parked) {
    std::erase_if(records, [](const DeviationRecord& r) { return r.parked; });
  }
  for (const auto& r : records) {
    if (r.min_fde_8s.size() != models.size()) {
      throw std::invalid_argument("record minFDE count does not match the model count");
    }
  }
  if (window == 0 || window > records.size()) {
    throw std::invalid_argument("window " + std::to_string(window) + " exceeds record count " +
                                std::to_string(records.size()));
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const DeviationRecord& a, const DeviationRecord& b) {
                     if (a.deviation != b.deviation) return a.deviation < b.deviation;
                     if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
                     return a.agent_id < b.agent_id;
                   });
  DeviationCurve curve;
  curve.models.assign(models.begin(), models.end());
  const std::size_t rows = records.size() - window + 1;
  curve.rows.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    curve.rows[i].rank = i + window - 1;
    curve.rows[i].deviation = records[i + window - 1].deviation;
  }
  std::vector<double> column(records.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (std::size_t i = 0; i < records.size(); ++i) column[i] = records[i].min_fde_8s[m];
    const auto smoothed = moving_average(column, window);
    for (std::size_t i = 0; i < rows; ++i) curve.rows[i].smoothed_min_fde.push_back(smoothed[i]);
  }
  return curve;
}

double coverage(const IntentionPointSet& points, Vec2 gt_endpoint) {
  if (points.points.empty()) return std::numeric_limits<double>::infinity();
  std::vector<double> xs, ys;
  xs.reserve(points.points.size());
  ys.reserve(points.points.size());
  for (Vec2 p : points.points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  return std::sqrt(kernels::nearest_point(gt_endpoint.x, gt_endpoint.y, xs, ys).squared_distance);
}

}  // namespace intentforge
