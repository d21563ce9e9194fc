#include "intentforge/lane_assoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>
#include <unordered_set>

namespace intentforge {

namespace {

constexpr double kStationaryDisplacement = 0.1;

struct UpstreamItem {
  SegmentId segment;
  double arc_to_start;  // arc length from the seed back to this segment's first node
};

}  // namespace

void AssocConfig::validate() const {
  if (!(heading_threshold > 0.0)) throw std::invalid_argument("heading_threshold must be positive");
  if (!(proximity_limit > 0.0)) throw std::invalid_argument("proximity_limit must be positive");
  if (!(backwards_look >= 0.0)) throw std::invalid_argument("backwards_look must be non-negative");
}

double derive_heading(const AgentTrack& track) {
  const AgentState* last = nullptr;
  const AgentState* prev = nullptr;
  for (auto it = track.history.rbegin(); it != track.history.rend(); ++it) {
    if (!it->valid) continue;
    if (!last) {
      last = &*it;
    } else {
      prev = &*it;
      break;
    }
  }
  if (last && prev) {
    const Vec2 d = last->position - prev->position;
    if (norm(d) > kStationaryDisplacement) return heading_of(d);
  }
  return track.current().heading;
}

double lane_heading_at(const VectorMap& map, SegmentId segment, std::size_t index) {
  const LaneSegment& seg = map.segment(segment);
  if (seg.nodes.size() < 2) throw std::invalid_argument("segment has fewer than 2 nodes");
  if (index >= seg.nodes.size()) throw std::out_of_range("node index out of range");
  const std::size_t i = index + 1 < seg.nodes.size() ? index : index - 1;
  return heading_of(seg.nodes[i + 1].position - seg.nodes[i].position);
}

AssociationResult associate(const VectorMap& map, const AgentTrack& track,
                            const AssocConfig& cfg) {
  cfg.validate();
  if (track.object_class != ObjectClass::vehicle) {
    throw std::invalid_argument("lane association applies to vehicles only");
  }
  const Vec2 pos = track.current().position;
  const double heading = derive_heading(track);

  auto aligned = [&](NodeRef ref) {
    return angle_difference(lane_heading_at(map, ref.segment, ref.index), heading) <=
           cfg.heading_threshold;
  };

  AssociationResult result;
  const auto hits = map.nearest_lane_nodes(pos, cfg.proximity_limit);
  auto seed = std::find_if(hits.begin(), hits.end(),
                           [&](const NodeHit& h) { return aligned(h.node); });
  if (seed == hits.end()) return result;

  std::set<NodeRef> seen{seed->node};
  result.candidates.push_back(*seed);

  // Upstream walk bounded by cumulative arc length, shortest arc first so
  // every segment is expanded at its minimal upstream distance.
  auto later = [](const UpstreamItem& a, const UpstreamItem& b) {
    if (a.arc_to_start != b.arc_to_start) return a.arc_to_start > b.arc_to_start;
    return a.segment > b.segment;
  };
  std::priority_queue<UpstreamItem, std::vector<UpstreamItem>, decltype(later)> pending(later);
  std::unordered_set<SegmentId> expanded;
  pending.push({seed->node.segment,
                map.segment(seed->node.segment).nodes[seed->node.index].arc_offset});
  while (!pending.empty()) {
    const UpstreamItem item = pending.top();
    pending.pop();
    if (!expanded.insert(item.segment).second) continue;
    const LaneSegment& seg = map.segment(item.segment);
    for (SegmentId entry_id : seg.entry_ids) {
      const LaneSegment& entry = map.segment(entry_id);
      const double branch_at =
          item.arc_to_start + distance(entry.nodes.back().position, seg.nodes.front().position);
      if (branch_at > cfg.backwards_look) continue;
      if (entry.exit_ids.size() > 1) {
        for (SegmentId sibling_id : entry.exit_ids) {
          if (sibling_id == item.segment) continue;
          const LaneSegment& sibling = map.segment(sibling_id);
          NodeHit best{{sibling_id, 0}, std::numeric_limits<double>::infinity()};
          for (std::size_t k = 0; k < sibling.nodes.size(); ++k) {
            const double d = distance(pos, sibling.nodes[k].position);
            if (d < best.distance) best = {{sibling_id, static_cast<std::uint32_t>(k)}, d};
          }
          if (best.distance <= cfg.proximity_limit && aligned(best.node) &&
              seen.insert(best.node).second) {
            result.candidates.push_back(best);
          }
        }
      }
      if (!expanded.count(entry_id)) pending.push({entry_id, branch_at + entry.length()});
    }
  }

  std::sort(result.candidates.begin(), result.candidates.end(),
            [](const NodeHit& a, const NodeHit& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return a.node < b.node;
            });
  result.fallback = false;
  return result;
}

}  // namespace intentforge
