#pragma once

// Deterministic synthetic scenarios covering the lane-association edge cases
// and the legal / illegal manoeuvre archetypes used by the analysis.
//
// Supported template/behavior matrix:
//
//   template           | follow_lane | corner_cut | illegal_uturn | offroad_parking | lane_merge_violation
//   -------------------+-------------+------------+---------------+-----------------+---------------------
//   straight           |      x      |            |       x       |                 |
//   intersection_4way  |      x      |     x      |               |                 |
//   uturn_split        |      x      |     x      |               |                 |
//   merge              |      x      |            |               |                 |          x
//   parking_adjacent   |      x      |            |               |        x        |
//
// The primary agent is always the first track. Lanes are sampled with node
// spacing at most 0.49 m and all values sit on the 6-decimal file grid.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "intentforge/map_model.hpp"

namespace intentforge {

enum class Template { straight, intersection_4way, uturn_split, merge, parking_adjacent };
enum class Behavior { follow_lane, corner_cut, illegal_uturn, offroad_parking, lane_merge_violation };

std::string_view to_string(Template t);
std::string_view to_string(Behavior b);
std::optional<Template> parse_template(std::string_view s);
std::optional<Behavior> parse_behavior(std::string_view s);

bool is_supported(Template t, Behavior b);
std::vector<Behavior> supported_behaviors(Template t);

/// follow_lane and corner_cut end on the legal road graph.
bool is_legal(Behavior b);

struct GenSpec {
  Template layout = Template::straight;
  std::uint64_t seed = 0;
  double speed_limit_mps = 30.0 * kMetersPerSecondPerMph;
  Behavior agent_behavior = Behavior::follow_lane;
  AgentId agent_id_base = 0;  // primary agent gets agent_id_base + 1
  bool background_agents = true;
};

/// Throws std::invalid_argument for an unsupported combination.
Scenario generate(const GenSpec& spec);

struct SuiteOptions {
  bool legal_only = false;  // only follow_lane / corner_cut primaries
  bool background_agents = true;
};

/// n scenarios with randomized templates, behaviors and speed limits,
/// deterministic in `seed`. Agent ids are unique across the suite.
std::vector<Scenario> generate_suite(int n, std::uint64_t seed, const SuiteOptions& opts = {});

/// Manhattan grid of two-way roads, `blocks` x `blocks` blocks of
/// `block_length` meters, with straight connector lanes for every
/// non-U-turn movement at each intersection.
VectorMap make_grid_network(int blocks, double block_length, double speed_limit_mps);

}  // namespace intentforge
