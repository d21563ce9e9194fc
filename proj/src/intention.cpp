#include "intentforge/intention.hpp"

#include <stdexcept>

namespace intentforge {

std::string_view to_string(IntentKind kind) {
  switch (kind) {
    case IntentKind::static_:
      return "static";
    case IntentKind::dynamic:
      return "dynamic";
    case IntentKind::mixed:
      return "mixed";
  }
  return "static";
}

std::optional<IntentKind> parse_intent_kind(std::string_view s) {
  if (s == "static") return IntentKind::static_;
  if (s == "dynamic") return IntentKind::dynamic;
  if (s == "mixed") return IntentKind::mixed;
  return std::nullopt;
}

void MixConfig::validate() const {
  if (!(dynamic_weight > 0.0) || !(static_weight > 0.0)) {
    throw std::invalid_argument("mix weights must be positive");
  }
}

Vec2 to_agent_frame(Vec2 global, const AgentTrack& agent) {
  const AgentState& cur = agent.current();
  return rotate(global - cur.position, -cur.heading);
}

Vec2 from_agent_frame(Vec2 local, const AgentTrack& agent) {
  const AgentState& cur = agent.current();
  return rotate(local, cur.heading) + cur.position;
}

std::optional<Vec2> gt_endpoint_agent_frame(const AgentTrack& agent) {
  if (agent.future.size() != static_cast<std::size_t>(kFutureSteps)) return std::nullopt;
  const AgentState& end = agent.future.back();
  if (!end.valid) return std::nullopt;
  return to_agent_frame(end.position, agent);
}

IntentionPointSet static_intents(std::span<const Vec2> endpoints, ObjectClass /*object_class*/,
                                 const KMeansConfig& cfg) {
  if (endpoints.empty()) throw std::invalid_argument("static_intents: no endpoints");
  std::vector<WeightedPoint> pts;
  pts.reserve(endpoints.size());
  for (Vec2 p : endpoints) pts.push_back({p, 1.0});
  return {IntentKind::static_, weighted_kmeans(pts, cfg)};
}

IntentionPointSet dynamic_intents(const ReachabilitySet& reach, const AgentTrack& agent,
                                  const KMeansConfig& cfg) {
  if (reach.entries.empty()) throw std::invalid_argument("dynamic_intents: empty reachability set");
  std::vector<WeightedPoint> pts;
  pts.reserve(reach.entries.size());
  for (const auto& e : reach.entries) pts.push_back({to_agent_frame(e.position, agent), 1.0});
  return {IntentKind::dynamic, weighted_kmeans(pts, cfg)};
}

IntentionPointSet mixed_intents(const IntentionPointSet& dyn, const IntentionPointSet& stat,
                                const MixConfig& mix, const KMeansConfig& cfg) {
  mix.validate();
  if (dyn.kind != IntentKind::dynamic || stat.kind != IntentKind::static_) {
    throw std::invalid_argument("mixed_intents expects one dynamic and one static set");
  }
  std::vector<WeightedPoint> pool;
  pool.reserve(dyn.points.size() + stat.points.size());
  for (Vec2 p : dyn.points) pool.push_back({p, mix.dynamic_weight});
  for (Vec2 p : stat.points) pool.push_back({p, mix.static_weight});
  return {IntentKind::mixed, weighted_kmeans(pool, cfg)};
}

std::vector<Vec2> collect_endpoints(std::span<const Scenario> scenarios, ObjectClass object_class) {
  std::vector<Vec2> out;
  for (const auto& s : scenarios) {
    for (const auto& t : s.tracks) {
      if (t.object_class != object_class || !t.current().valid) continue;
      if (auto e = gt_endpoint_agent_frame(t)) out.push_back(*e);
    }
  }
  return out;
}

}  // namespace intentforge
