#include "intentforge/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace intentforge {

void GraphConfig::validate() const {
  if (!(time_budget >= 0.0)) throw std::invalid_argument("time_budget must be >= 0");
  if (!(speed_offset >= 0.0)) throw std::invalid_argument("speed_offset must be >= 0");
}

double travel_time(double distance, double speed_limit, const GraphConfig& cfg) {
  if (!(speed_limit > 0.0)) throw std::invalid_argument("speed limit must be positive");
  if (!(distance >= 0.0)) throw std::invalid_argument("distance must be non-negative");
  return distance / (speed_limit + cfg.speed_offset);
}

RoadGraph::RoadGraph(std::vector<NodeRef> refs, std::vector<Vec2> positions,
                     std::vector<Edge> edges)
    : refs_(std::move(refs)), positions_(std::move(positions)), edges_(std::move(edges)) {
  if (refs_.size() != positions_.size()) throw std::invalid_argument("node arrays differ in size");
  if (!std::is_sorted(refs_.begin(), refs_.end())) throw std::invalid_argument("node refs must be sorted");
  for (const auto& e : edges_) {
    if (e.from >= refs_.size() || e.to >= refs_.size()) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (!(e.travel_time >= 0.0)) throw std::invalid_argument("negative edge weight");
  }
  std::stable_sort(edges_.begin(), edges_.end(),
                   [](const Edge& a, const Edge& b) { return a.from < b.from; });
  first_edge_.assign(refs_.size() + 1, 0);
  for (const auto& e : edges_) ++first_edge_[e.from + 1];
  for (std::size_t i = 0; i < refs_.size(); ++i) first_edge_[i + 1] += first_edge_[i];
}

std::size_t RoadGraph::index_of(NodeRef ref) const {
  auto it = std::lower_bound(refs_.begin(), refs_.end(), ref);
  if (it == refs_.end() || *it != ref) throw std::out_of_range("node not in graph");
  return static_cast<std::size_t>(it - refs_.begin());
}

RoadGraph build_graph(const VectorMap& map, const GraphConfig& cfg) {
  cfg.validate();
  const std::size_t n = map.node_count();
  std::vector<NodeRef> refs(n);
  std::vector<Vec2> positions(n);
  for (std::size_t i = 0; i < n; ++i) {
    refs[i] = map.node_ref(i);
    positions[i] = map.position(i);
  }

  std::vector<Edge> edges;
  for (const auto& seg : map.segments()) {
    const auto base = static_cast<std::uint32_t>(map.segment_offset(seg.id));
    const auto count = static_cast<std::uint32_t>(seg.nodes.size());
    for (std::uint32_t k = 0; k + 1 < count; ++k) {
      const double gap = distance(seg.nodes[k].position, seg.nodes[k + 1].position);
      edges.push_back({base + k, base + k + 1, travel_time(gap, seg.speed_limit, cfg),
                       EdgeKind::lane});
    }
    for (SegmentId exit_id : seg.exit_ids) {
      const LaneSegment& next = map.segment(exit_id);
      const auto to = static_cast<std::uint32_t>(map.segment_offset(exit_id));
      const double gap = distance(seg.nodes.back().position, next.nodes.front().position);
      edges.push_back({base + count - 1, to, travel_time(gap, seg.speed_limit, cfg),
                       EdgeKind::connector});
    }
    for (const auto& side : {seg.left, seg.right}) {
      if (!side || !side->change_ok) continue;
      const LaneSegment& other = map.segment(side->id);
      const auto other_base = static_cast<std::uint32_t>(map.segment_offset(side->id));
      for (std::uint32_t k = 0; k < count; ++k) {
        const Vec2 p = seg.nodes[k].position;
        std::uint32_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::uint32_t j = 0; j < other.nodes.size(); ++j) {
          const double d = distance(p, other.nodes[j].position);
          if (d < best_d) {
            best_d = d;
            best = j;
          }
        }
        edges.push_back({base + k, other_base + best, travel_time(best_d, seg.speed_limit, cfg),
                         EdgeKind::lane_change});
      }
    }
  }
  return RoadGraph(std::move(refs), std::move(positions), std::move(edges));
}

ReachabilitySet reach_from(const RoadGraph& graph, std::span<const std::uint32_t> starts,
                           double budget) {
  if (!(budget >= 0.0)) throw std::invalid_argument("budget must be >= 0");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(graph.node_count(), kInf);
  std::vector<char> done(graph.node_count(), 0);
  using Item = std::pair<double, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (auto s : starts) {
    if (s >= graph.node_count()) throw std::out_of_range("start node out of range");
    if (dist[s] > 0.0) {
      dist[s] = 0.0;
      heap.push({0.0, s});
    }
  }
  ReachabilitySet out;
  out.budget = budget;
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u]) continue;
    done[u] = 1;
    out.entries.push_back({graph.node(u), u, graph.position(u), d});
    for (const Edge& e : graph.out_edges(u)) {
      const double nd = d + e.travel_time;
      if (nd <= budget && nd < dist[e.to]) {
        dist[e.to] = nd;
        heap.push({nd, e.to});
      }
    }
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const ReachEntry& a, const ReachEntry& b) {
    if (a.arrival_time != b.arrival_time) return a.arrival_time < b.arrival_time;
    return a.node < b.node;
  });
  return out;
}

ReachabilitySet reach(const RoadGraph& graph, const AssociationResult& starts,
                      const GraphConfig& cfg) {
  cfg.validate();
  if (starts.fallback || starts.candidates.empty()) {
    throw std::invalid_argument(
        "reach called with a fallback association; use static intention points");
  }
  std::vector<std::uint32_t> idx;
  for (const auto& c : starts.candidates) {
    idx.push_back(static_cast<std::uint32_t>(graph.index_of(c.node)));
  }
  return reach_from(graph, idx, cfg.time_budget);
}

}  // namespace intentforge
