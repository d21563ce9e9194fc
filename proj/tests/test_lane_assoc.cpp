#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>
#include <set>

#include "intentforge/lane_assoc.hpp"
#include "intentforge/scenario_gen.hpp"
#include "test_support.hpp"

using namespace intentforge;
using testing::moving_track;
using testing::straight;
constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

namespace {

// Seed oracle: exhaustive scan of every node with the proximity and heading
// rules, nearest survivor wins (ties by node ref).
std::optional<NodeHit> oracle_seed(const VectorMap& m, const AgentTrack& t, const AssocConfig& cfg) {
  const Vec2 p = t.current().position;
  const double h = derive_heading(t);
  std::optional<NodeHit> best;
  for (const auto& s : m.segments()) {
    for (std::uint32_t i = 0; i < s.nodes.size(); ++i) {
      const double d = distance(p, s.nodes[i].position);
      if (d > cfg.proximity_limit) continue;
      if (angle_difference(lane_heading_at(m, s.id, i), h) > cfg.heading_threshold) continue;
      const NodeHit hit{{s.id, i}, d};
      if (!best || d < best->distance || (d == best->distance && hit.node < best->node)) best = hit;
    }
  }
  return best;
}

// Approach 1 ends at the origin and splits into 2 (straight east) and 3
// (bearing slightly left).
VectorMap y_split() {
  std::vector<LaneSegment> segs{straight(1, {-20, 0}, {0, 0}, 40), straight(2, {0, 0}, {20, 0}, 40),
                                straight(3, {0, 0}, {20, 2}, 41)};
  testing::link(segs, 1, 2);
  testing::link(segs, 1, 3);
  return VectorMap(segs);
}

}  // namespace

TEST_CASE("derive_heading") {
  AgentTrack t = moving_track(1, {1, 0}, 0.0, 10.0);
  CHECK(derive_heading(t) == doctest::Approx(0.0));

  t = moving_track(1, {0, 0}, 1.2, 0.0);
  CHECK(derive_heading(t) == 1.2);

  t.history[9].position = {0, 0};
  t.history[10].position = {1, 1};
  CHECK(derive_heading(t) == doctest::Approx(kPi / 4));

  // invalid states are skipped
  t.history[9].valid = false;
  t.history[8].position = {1, 0};
  CHECK(derive_heading(t) == doctest::Approx(kPi / 2));
}

TEST_CASE("lane_heading_at: straight lane and endpoint rule") {
  const VectorMap m({straight(1, {0, 0}, {10, 0}, 20)});
  for (std::size_t i = 0; i <= 20; ++i) CHECK(lane_heading_at(m, 1, i) == 0.0);

  std::vector<Vec2> bent{{0, 0}, {1, 0}, {1, 1}};
  const VectorMap b({make_segment(2, bent, 10.0)});
  CHECK(lane_heading_at(b, 2, 2) == doctest::Approx(kPi / 2));
  CHECK(lane_heading_at(b, 2, 2) == lane_heading_at(b, 2, 1));
}

TEST_CASE("lane_heading_at matches the analytic tangent of a 1-degree arc") {
  std::vector<Vec2> arc;
  const double r = 50.0;
  for (int d = 0; d <= 90; ++d) arc.push_back({r * std::cos(d * kDeg), r * std::sin(d * kDeg)});
  const VectorMap m({make_segment(1, arc, 10.0)});
  for (int d = 0; d <= 90; ++d) {
    const double tangent = d * kDeg + kPi / 2;
    CHECK(angle_difference(lane_heading_at(m, 1, d), tangent) < 0.02);
  }
}

TEST_CASE("vehicle on a node with aligned heading") {
  const VectorMap m({straight(1, {0, 0}, {10, 0}, 20)});
  const auto r = associate(m, moving_track(1, {3.0, 0.0}, 0.0, 5.0));
  CHECK_FALSE(r.fallback);
  REQUIRE(r.candidates.size() == 1);
  CHECK(r.candidates[0].node == NodeRef{1, 6});
  CHECK(r.candidates[0].distance == 0.0);
}

TEST_CASE("mid-intersection: misaligned nearer lane is rejected") {
  // own lane northbound at x=0; crossing lane eastbound at y=-1
  const VectorMap m({straight(1, {0, -10}, {0, 10}, 40), straight(2, {-10, -1}, {10, -1}, 40)});
  const AgentTrack t = moving_track(1, {2.0, 0.0}, 100 * kDeg, 0.0);
  const auto hits = m.nearest_lane_nodes({2.0, 0.0}, 5.0);
  REQUIRE(hits[0].node.segment == 2);
  CHECK(hits[0].distance == doctest::Approx(1.0));

  const auto r = associate(m, t);
  REQUIRE_FALSE(r.fallback);
  CHECK(r.candidates[0].node == NodeRef{1, 20});
  CHECK(r.candidates[0].distance == doctest::Approx(2.0));
  CHECK(r.candidates[0] == *oracle_seed(m, t, {}));
}

TEST_CASE("parking lot 6 m from every node falls back") {
  const VectorMap m({straight(1, {-10, 0}, {10, 0}, 40)});
  const AgentTrack t = moving_track(1, {0.0, -6.0}, 0.0, 0.0);
  const auto r = associate(m, t);
  CHECK(r.fallback);
  CHECK(r.candidates.empty());
  CHECK_FALSE(oracle_seed(m, t, {}).has_value());
}

TEST_CASE("non-vehicles are rejected") {
  const VectorMap m({straight(1, {-10, 0}, {10, 0}, 40)});
  CHECK_THROWS_AS(associate(m, moving_track(1, {0, 0}, 0, 1, ObjectClass::pedestrian)),
                  std::invalid_argument);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((AssocConfig{0.0, 5.0, 10.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((AssocConfig{0.5, -1.0, 10.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((AssocConfig{0.5, 5.0, -1.0}.validate()), std::invalid_argument);
  CHECK_NOTHROW((AssocConfig{0.5, 5.0, 0.0}.validate()));
}

TEST_CASE("backwards look adds the sibling branch within range") {
  const VectorMap m = y_split();
  SUBCASE("branch 8 m upstream") {
    const auto r = associate(m, moving_track(1, {8.0, 0.0}, 0.0, 8.0));
    REQUIRE(r.candidates.size() == 2);
    CHECK(r.candidates[0].node == NodeRef{2, 16});
    CHECK(r.candidates[1].node.segment == 3);
  }
  SUBCASE("branch 12 m upstream is beyond the look") {
    const auto r = associate(m, moving_track(1, {12.0, 0.0}, 0.0, 8.0));
    REQUIRE(r.candidates.size() == 1);
    CHECK(r.candidates[0].node.segment == 2);
  }
  SUBCASE("look of zero disables it") {
    const auto r = associate(m, moving_track(1, {8.0, 0.0}, 0.0, 8.0), {kPi / 4, 5.0, 0.0});
    CHECK(r.candidates.size() == 1);
  }
  SUBCASE("look spans several segments") {
    std::vector<LaneSegment> segs{straight(1, {-20, 0}, {0, 0}, 40), straight(2, {0, 0}, {4, 0}, 8),
                                  straight(3, {0, 0}, {20, 3}, 41), straight(4, {4, 0}, {20, 0}, 32)};
    testing::link(segs, 1, 2);
    testing::link(segs, 1, 3);
    testing::link(segs, 2, 4);
    const VectorMap chain(segs);
    // 5 m into segment 4, 9 m from the branch point
    const auto r = associate(chain, moving_track(1, {5.0 + 4.0, 0.0}, 0.0, 8.0));
    REQUIRE(r.candidates.size() == 2);
    CHECK(r.candidates[1].node.segment == 3);
    const auto tight = associate(chain, moving_track(1, {9.0, 0.0}, 0.0, 8.0), {kPi / 4, 5.0, 8.5});
    CHECK(tight.candidates.size() == 1);
  }
}

TEST_CASE("U-turn split: both branch nodes become candidates") {
  GenSpec spec;
  spec.layout = Template::uturn_split;
  spec.agent_behavior = Behavior::corner_cut;
  const Scenario s = generate(spec);
  const AgentTrack& t = s.tracks[0];
  const AssocConfig cfg;

  // the two branches diverge from segment 1, within 10 m upstream of the seed
  const auto seed = oracle_seed(s.map, t, cfg);
  REQUIRE(seed.has_value());
  CHECK(seed->node.segment == 4);
  const double upstream = s.map.segment(4).nodes[seed->node.index].arc_offset;
  CHECK(upstream <= cfg.backwards_look);
  CHECK(s.map.segment(1).exit_ids == std::vector<SegmentId>{2, 4});

  // independent scan of the sibling branch
  const LaneSegment& left = s.map.segment(2);
  std::size_t best = 0;
  for (std::size_t i = 1; i < left.nodes.size(); ++i) {
    if (distance(t.current().position, left.nodes[i].position) <
        distance(t.current().position, left.nodes[best].position)) {
      best = i;
    }
  }
  const double dleft = distance(t.current().position, left.nodes[best].position);
  CHECK(dleft <= cfg.proximity_limit);

  const auto r = associate(s.map, t, cfg);
  REQUIRE(r.candidates.size() == 2);
  CHECK(r.candidates[0] == *seed);
  CHECK(r.candidates[1].node == NodeRef{2, static_cast<std::uint32_t>(best)});
  CHECK(r.candidates[1].distance == dleft);
}

TEST_CASE("randomized scenes: candidate invariants, determinism, monotonicity") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<LaneSegment> segs;
    SegmentId id = 1;
    for (int i = 0; i < 6; ++i, ++id) {
      const Vec2 a{testing::uniform(rng, -15, 15), testing::uniform(rng, -15, 15)};
      const double h = testing::uniform(rng, -kPi, kPi);
      segs.push_back(straight(id, a, a + 20.0 * Vec2{std::cos(h), std::sin(h)}, 40));
    }
    // a split at the end of segment 1
    const Vec2 e = segs[0].nodes.back().position;
    const double h0 = lane_heading_at(VectorMap({segs[0]}), 1, 0);
    for (double turn : {0.2, -0.3}) {
      segs.push_back(straight(id, e, e + 10.0 * Vec2{std::cos(h0 + turn), std::sin(h0 + turn)}, 20));
      testing::link(segs, 1, id++);
    }
    const VectorMap m(segs);
    for (int q = 0; q < 20; ++q) {
      const AgentTrack t = moving_track(1, {testing::uniform(rng, -20, 20), testing::uniform(rng, -20, 20)},
                                        testing::uniform(rng, -kPi, kPi), testing::uniform(rng, 0, 10));
      const AssocConfig cfg{testing::uniform(rng, 0.1, 1.5), testing::uniform(rng, 1, 8), 10.0};
      const auto r = associate(m, t, cfg);
      CHECK(r.fallback == r.candidates.empty());
      const double h = derive_heading(t);
      for (const auto& c : r.candidates) {
        CHECK(c.distance <= cfg.proximity_limit);
        CHECK(angle_difference(lane_heading_at(m, c.node.segment, c.node.index), h) <= cfg.heading_threshold);
      }
      CHECK(r == associate(m, t, cfg));
      const auto seed = oracle_seed(m, t, cfg);
      CHECK(seed.has_value() != r.fallback);
      if (seed) CHECK(std::find(r.candidates.begin(), r.candidates.end(), *seed) != r.candidates.end());

      // enlarged thresholds keep every candidate as long as the seed is unchanged
      const AssocConfig wider{cfg.heading_threshold * 1.5, cfg.proximity_limit * 1.5, cfg.backwards_look};
      const auto rw = associate(m, t, wider);
      const auto wseed = oracle_seed(m, t, wider);
      if (seed && wseed && seed->node == wseed->node) {
        for (const auto& c : r.candidates) {
          CHECK(std::find(rw.candidates.begin(), rw.candidates.end(), c) != rw.candidates.end());
        }
      }
      if (!r.fallback) CHECK_FALSE(rw.fallback);
    }
  }
}
