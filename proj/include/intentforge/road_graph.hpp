#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "intentforge/lane_assoc.hpp"
#include "intentforge/map_model.hpp"

namespace intentforge {

struct GraphConfig {
  double time_budget = 8.0;                          // seconds
  double speed_offset = 15.0 * kMetersPerSecondPerMph;  // m/s added to every limit

  void validate() const;
};

/// distance / (speed_limit + cfg.speed_offset). Throws std::invalid_argument
/// for a non-positive speed limit or negative distance.
double travel_time(double distance, double speed_limit, const GraphConfig& cfg);

enum class EdgeKind : std::uint8_t { lane, connector, lane_change };

struct Edge {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  double travel_time = 0.0;
  EdgeKind kind = EdgeKind::lane;
};

/// Directed lane-node graph. Node indices are the map's flat node indices;
/// edges are stored grouped by source node.
class RoadGraph {
 public:
  RoadGraph() = default;
  RoadGraph(std::vector<NodeRef> refs, std::vector<Vec2> positions, std::vector<Edge> edges);

  std::size_t node_count() const { return refs_.size(); }
  NodeRef node(std::size_t i) const { return refs_[i]; }
  Vec2 position(std::size_t i) const { return positions_[i]; }
  std::size_t index_of(NodeRef ref) const;

  std::span<const Edge> edges() const { return edges_; }
  std::span<const Edge> out_edges(std::size_t i) const {
    return std::span<const Edge>(edges_).subspan(first_edge_[i], first_edge_[i + 1] - first_edge_[i]);
  }

 private:
  std::vector<NodeRef> refs_;  // sorted, equal to the map's flat order
  std::vector<Vec2> positions_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> first_edge_;
};

/// Intra-segment edges between consecutive nodes, segment-end to exit-start
/// connectors, and for every node of a segment whose neighbor permits a lane
/// change, an edge to the nearest node of that neighbor. Weights use the
/// originating segment's speed limit.
RoadGraph build_graph(const VectorMap& map, const GraphConfig& cfg = {});

struct ReachEntry {
  NodeRef node;
  std::uint32_t index = 0;  // graph node index
  Vec2 position;
  double arrival_time = 0.0;
};

struct ReachabilitySet {
  std::vector<ReachEntry> entries;  // ascending by (arrival_time, node)
  double budget = 0.0;
};

/// Multi-source Dijkstra from graph node indices, truncated to the budget.
ReachabilitySet reach_from(const RoadGraph& graph, std::span<const std::uint32_t> starts,
                           double budget);

/// Nodes reachable from the association candidates within cfg.time_budget.
/// Throws std::invalid_argument for a fallback association.
ReachabilitySet reach(const RoadGraph& graph, const AssociationResult& starts,
                      const GraphConfig& cfg = {});

}  // namespace intentforge
