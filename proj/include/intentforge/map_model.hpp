#pragma once

// Scenario data model: lane map, agent tracks, and the canonical scenario
// file format.

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "intentforge/geometry.hpp"

namespace intentforge {

using SegmentId = std::int64_t;
using AgentId = std::int64_t;

inline constexpr int kStepsPerSecond = 10;
inline constexpr int kHistorySteps = 11;  // 1 s past + current
inline constexpr int kFutureSteps = 80;   // 8 s
inline constexpr double kMaxNodeSpacing = 2.0;
inline constexpr double kMetersPerSecondPerMph = 0.44704;

enum class ErrorKind { syntax, schema, invariant };

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

struct LaneNode {
  Vec2 position;
  double arc_offset = 0.0;

  friend bool operator==(const LaneNode&, const LaneNode&) = default;
};

struct NeighborRef {
  SegmentId id = 0;
  bool change_ok = false;

  friend bool operator==(const NeighborRef&, const NeighborRef&) = default;
};

struct LaneSegment {
  SegmentId id = 0;
  std::vector<LaneNode> nodes;
  double speed_limit = 0.0;  // m/s
  std::vector<SegmentId> exit_ids;
  std::vector<SegmentId> entry_ids;
  std::optional<NeighborRef> left;
  std::optional<NeighborRef> right;

  double length() const { return nodes.empty() ? 0.0 : nodes.back().arc_offset; }

  friend bool operator==(const LaneSegment&, const LaneSegment&) = default;
};

/// Builds a segment from raw positions; arc offsets are accumulated from the
/// Euclidean spacing.
LaneSegment make_segment(SegmentId id, std::span<const Vec2> positions,
                         double speed_limit);

struct NodeRef {
  SegmentId segment = 0;
  std::uint32_t index = 0;

  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

struct NodeHit {
  NodeRef node;
  double distance = 0.0;

  friend bool operator==(const NodeHit&, const NodeHit&) = default;
};

/// Immutable lane map. Segments are stored sorted by id; every node also has
/// a dense "flat" index in [0, node_count()) following that order.
class VectorMap {
 public:
  VectorMap() = default;

  /// Validates all map invariants; throws ScenarioError(invariant) on failure.
  explicit VectorMap(std::vector<LaneSegment> segments);

  const std::vector<LaneSegment>& segments() const { return segments_; }
  const LaneSegment* find(SegmentId id) const;
  const LaneSegment& segment(SegmentId id) const;

  std::size_t node_count() const { return flat_positions_x_.size(); }
  std::size_t flat_index(NodeRef ref) const;
  NodeRef node_ref(std::size_t flat) const;
  Vec2 position(NodeRef ref) const;
  Vec2 position(std::size_t flat) const {
    return {flat_positions_x_[flat], flat_positions_y_[flat]};
  }
  std::size_t segment_offset(SegmentId id) const;

  /// All nodes within `radius` (inclusive), ascending by distance with ties
  /// broken by (segment id, node index). Throws std::invalid_argument for a
  /// non-positive radius.
  std::vector<NodeHit> nearest_lane_nodes(Vec2 p, double radius) const;

  friend bool operator==(const VectorMap& a, const VectorMap& b) {
    return a.segments_ == b.segments_;
  }

 private:
  struct CellKey {
    std::int64_t cx;
    std::int64_t cy;
    friend bool operator==(const CellKey&, const CellKey&) = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& k) const {
      return std::hash<std::int64_t>()(k.cx * 73856093LL ^ k.cy * 19349663LL);
    }
  };
  static constexpr double kCellSize = 4.0;

  void validate() const;
  void build_index();
  CellKey cell_of(Vec2 p) const;

  std::vector<LaneSegment> segments_;
  std::unordered_map<SegmentId, std::size_t> by_id_;
  std::vector<std::size_t> offsets_;  // flat index of each segment's node 0
  std::vector<double> flat_positions_x_;
  std::vector<double> flat_positions_y_;
  std::vector<std::size_t> flat_segment_;  // position in segments_
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellHash> grid_;
};

/// Distance from `p` to the polyline through the nodes. Throws
/// std::invalid_argument for fewer than two nodes.
double point_to_polyline_distance(Vec2 p, std::span<const LaneNode> nodes);

enum class ObjectClass { vehicle, pedestrian, cyclist };

std::string_view to_string(ObjectClass c);
std::optional<ObjectClass> parse_object_class(std::string_view s);

struct AgentState {
  int timestamp_index = 0;
  Vec2 position;
  double heading = 0.0;  // (-pi, pi]
  double speed = 0.0;    // m/s
  bool valid = false;

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct AgentTrack {
  AgentId agent_id = 0;
  ObjectClass object_class = ObjectClass::vehicle;
  double length = 0.0;
  double width = 0.0;
  std::vector<AgentState> history;  // kHistorySteps
  std::vector<AgentState> future;   // kFutureSteps

  const AgentState& current() const { return history.back(); }

  friend bool operator==(const AgentTrack&, const AgentTrack&) = default;
};

struct Scenario {
  std::string scenario_id;
  VectorMap map;
  std::vector<AgentTrack> tracks;
  std::vector<AgentId> tracks_to_predict;

  const AgentTrack* find_track(AgentId id) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Checks track-level invariants (step counts, valid current state, unique
/// ids, tracks_to_predict membership). Map invariants are enforced by the
/// VectorMap constructor. Throws ScenarioError(invariant).
void validate(const Scenario& s);

/// Parses and validates a scenario file. Throws ScenarioError.
Scenario parse_scenario(std::string_view bytes);

/// Canonical serialization: sorted keys, 6-decimal fixed floats.
std::string write_scenario(const Scenario& s);

/// Rounds to the 6-decimal grid of the file format, so that the value
/// survives a write/parse round trip unchanged.
double quantize(double v);

/// "%.6f" formatting shared by every text output.
std::string format_fixed6(double v);

}  // namespace intentforge
