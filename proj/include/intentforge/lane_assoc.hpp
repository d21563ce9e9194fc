#pragma once

#include <numbers>
#include <vector>

#include "intentforge/map_model.hpp"

namespace intentforge {

struct AssocConfig {
  double heading_threshold = std::numbers::pi / 4.0;  // radians
  double proximity_limit = 5.0;                       // meters
  double backwards_look = 10.0;                       // meters of upstream arc; 0 disables

  /// Throws std::invalid_argument on non-positive thresholds or a negative
  /// backwards look.
  void validate() const;
};

struct AssociationResult {
  std::vector<NodeHit> candidates;  // ascending by distance
  bool fallback = true;

  friend bool operator==(const AssociationResult&, const AssociationResult&) = default;
};

/// Direction of travel from the last two valid history positions, or the
/// current state's heading when they are within 0.1 m of each other.
double derive_heading(const AgentTrack& track);

/// Direction from node i to node i+1; the last node uses its incoming edge.
double lane_heading_at(const VectorMap& map, SegmentId segment, std::size_t index);

/// Matches a vehicle to the lane node(s) it is travelling on.
///
/// The nearest node within the proximity limit whose lane heading agrees with
/// the vehicle heading becomes the seed. Walking upstream from the seed for
/// up to `backwards_look` meters, every segment that branches into several
/// exits contributes the nearest node of each of its exit segments, subject
/// to the same proximity and heading checks. An empty candidate set is the
/// fallback result. Throws std::invalid_argument for non-vehicles.
AssociationResult associate(const VectorMap& map, const AgentTrack& track,
                            const AssocConfig& cfg = {});

}  // namespace intentforge
