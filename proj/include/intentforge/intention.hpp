#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "intentforge/kmeans.hpp"
#include "intentforge/map_model.hpp"
#include "intentforge/road_graph.hpp"

namespace intentforge {

enum class IntentKind { static_, dynamic, mixed };

std::string_view to_string(IntentKind kind);
std::optional<IntentKind> parse_intent_kind(std::string_view s);

/// Exactly k points in the agent-centric frame.
struct IntentionPointSet {
  IntentKind kind = IntentKind::static_;
  std::vector<Vec2> points;

  std::size_t k() const { return points.size(); }

  friend bool operator==(const IntentionPointSet&, const IntentionPointSet&) = default;
};

struct MixConfig {
  double dynamic_weight = 3.0;
  double static_weight = 1.0;

  void validate() const;
};

/// Translate by -position, rotate by -heading of the agent's current state.
Vec2 to_agent_frame(Vec2 global, const AgentTrack& agent);
Vec2 from_agent_frame(Vec2 local, const AgentTrack& agent);

/// Agent-frame ground-truth endpoint at 8 s, if that state is valid.
std::optional<Vec2> gt_endpoint_agent_frame(const AgentTrack& agent);

/// Unit-weight clustering of dataset trajectory endpoints (agent frame).
/// `object_class` only labels the set; callers cluster each class separately.
IntentionPointSet static_intents(std::span<const Vec2> endpoints, ObjectClass object_class,
                                 const KMeansConfig& cfg = {});

/// Reachable node positions, moved into the agent frame and clustered.
/// Throws std::invalid_argument for an empty reachability set.
IntentionPointSet dynamic_intents(const ReachabilitySet& reach, const AgentTrack& agent,
                                  const KMeansConfig& cfg = {});

/// Pools one dynamic and one static set with per-kind weights and clusters
/// the pool again. Throws std::invalid_argument if the kinds are not exactly
/// one dynamic and one static set.
IntentionPointSet mixed_intents(const IntentionPointSet& dyn, const IntentionPointSet& stat,
                                const MixConfig& mix = {}, const KMeansConfig& cfg = {});

/// Ground-truth endpoints (agent frame) of every track of `object_class`
/// with a valid current state and a valid 8 s state.
std::vector<Vec2> collect_endpoints(std::span<const Scenario> scenarios, ObjectClass object_class);

}  // namespace intentforge
