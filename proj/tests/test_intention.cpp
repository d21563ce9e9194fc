#include <doctest.h>

#include <numbers>
#include <random>

#include "intentforge/intention.hpp"
#include "test_support.hpp"

using namespace intentforge;
using testing::moving_track;
using testing::straight;
constexpr double kPi = std::numbers::pi;

namespace {

IntentionPointSet random_set(std::mt19937_64& rng, IntentKind kind, std::size_t n = 64) {
  IntentionPointSet s{kind, {}};
  for (std::size_t i = 0; i < n; ++i) s.points.push_back({testing::uniform(rng, -60, 60), testing::uniform(rng, -20, 20)});
  std::sort(s.points.begin(), s.points.end(), [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  return s;
}

}  // namespace

TEST_CASE("kind names") {
  CHECK(to_string(IntentKind::static_) == "static");
  CHECK(parse_intent_kind("mixed") == IntentKind::mixed);
  CHECK_FALSE(parse_intent_kind("other").has_value());
}

TEST_CASE("agent frame") {
  const AgentTrack a = moving_track(1, {10, 20}, kPi / 2, 0.0);
  const Vec2 local = to_agent_frame({10, 30}, a);
  CHECK(local.x == doctest::Approx(10.0));
  CHECK(local.y == doctest::Approx(0.0));

  CHECK(to_agent_frame({10, 20}, a) == Vec2{0, 0});
  const AgentTrack b = moving_track(1, {3, 4}, 0.0, 0.0);
  CHECK(to_agent_frame({4, 4}, b) == Vec2{1, 0});

  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const AgentTrack t = moving_track(1, {testing::uniform(rng, -1e3, 1e3), testing::uniform(rng, -1e3, 1e3)},
                                      testing::uniform(rng, -kPi, kPi), 0.0);
    const Vec2 p{testing::uniform(rng, -1e3, 1e3), testing::uniform(rng, -1e3, 1e3)};
    const Vec2 back = from_agent_frame(to_agent_frame(p, t), t);
    CHECK(distance(back, p) < 1e-9);
  }
}

TEST_CASE("gt endpoint in agent frame") {
  AgentTrack t = moving_track(1, {5, 5}, kPi / 2, 10.0);
  const auto e = gt_endpoint_agent_frame(t);
  REQUIRE(e.has_value());
  CHECK(e->x == doctest::Approx(80.0));
  CHECK(e->y == doctest::Approx(0.0).epsilon(1e-9));
  t.future.back().valid = false;
  CHECK_FALSE(gt_endpoint_agent_frame(t).has_value());
}

TEST_CASE("static intents") {
  SUBCASE("10 endpoints are all kept and padded") {
    std::vector<Vec2> ends;
    for (int i = 0; i < 10; ++i) ends.push_back({static_cast<double>(i), 0.0});
    const auto s = static_intents(ends, ObjectClass::vehicle);
    CHECK(s.kind == IntentKind::static_);
    CHECK(s.k() == 64);
    for (Vec2 e : ends) CHECK(std::find(s.points.begin(), s.points.end(), e) != s.points.end());
    // equal weights: padding cycles in (x, y) order, 7 copies of 0..3 and 6 of the rest
    CHECK(std::count(s.points.begin(), s.points.end(), Vec2{0, 0}) == 7);
    CHECK(std::count(s.points.begin(), s.points.end(), Vec2{9, 0}) == 6);
  }
  SUBCASE("single repeated endpoint") {
    std::vector<Vec2> ends(5, Vec2{2, 3});
    const auto s = static_intents(ends, ObjectClass::cyclist);
    for (Vec2 p : s.points) CHECK(p == Vec2{2, 3});
  }
  SUBCASE("empty input") {
    std::vector<Vec2> none;
    CHECK_THROWS_AS(static_intents(none, ObjectClass::vehicle), std::invalid_argument);
  }
}

TEST_CASE("dynamic intents") {
  SUBCASE("exactly 64 reachable nodes come back in the agent frame") {
    const AgentTrack a = moving_track(1, {100, 50}, kPi / 2, 0.0);
    ReachabilitySet r;
    std::vector<Vec2> expect;
    for (std::uint32_t i = 0; i < 64; ++i) {
      const Vec2 p{100.0 + (i % 8), 50.0 + (i / 8)};
      r.entries.push_back({{1, i}, i, p, 0.0});
      expect.push_back(to_agent_frame(p, a));
    }
    std::sort(expect.begin(), expect.end(), [](Vec2 x, Vec2 y) { return x.x != y.x ? x.x < y.x : x.y < y.y; });
    const auto d = dynamic_intents(r, a);
    CHECK(d.kind == IntentKind::dynamic);
    CHECK(d.points == expect);
  }
  SUBCASE("straight single lane stays inside the lane corridor") {
    const VectorMap m({straight(1, {0, 0}, {250, 0}, 500)});
    const AgentTrack a = moving_track(1, {10, 0}, 0.0, 10.0);
    const auto assoc = associate(m, a);
    const RoadGraph g = build_graph(m);
    const auto r = reach(g, assoc);
    const auto d = dynamic_intents(r, a);
    REQUIRE(d.k() == 64);
    double lo = 1e300, hi = -1e300;
    for (const auto& e : r.entries) {
      lo = std::min(lo, to_agent_frame(e.position, a).x);
      hi = std::max(hi, to_agent_frame(e.position, a).x);
    }
    for (Vec2 p : d.points) {
      CHECK(std::abs(p.y) <= 0.25);
      CHECK(p.x >= lo - 0.25);
      CHECK(p.x <= hi + 0.25);
    }
  }
  SUBCASE("empty reach set") {
    CHECK_THROWS_AS(dynamic_intents(ReachabilitySet{}, moving_track(1, {0, 0}, 0, 0)), std::invalid_argument);
  }
}

TEST_CASE("mixed intents") {
  std::mt19937_64 rng(9);
  SUBCASE("identical sets give that set back for any ratio") {
    const auto base = random_set(rng, IntentKind::dynamic);
    IntentionPointSet stat = base;
    stat.kind = IntentKind::static_;
    for (double w : {1.0, 3.0, 5.0}) {
      const auto mix = mixed_intents(base, stat, {w, 1.0});
      CHECK(mix.kind == IntentKind::mixed);
      CHECK(mix.points == base.points);
    }
  }
  SUBCASE("3:1 weights equal three-fold replication") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto dyn = random_set(rng, IntentKind::dynamic);
      const auto stat = random_set(rng, IntentKind::static_);
      KMeansConfig cfg;
      cfg.seed = trial;
      std::vector<WeightedPoint> pool;
      for (int r = 0; r < 3; ++r) {
        for (Vec2 p : dyn.points) pool.push_back({p, 1.0});
      }
      for (Vec2 p : stat.points) pool.push_back({p, 1.0});
      CHECK(mixed_intents(dyn, stat, {3.0, 1.0}, cfg).points == weighted_kmeans(pool, cfg));
    }
  }
  SUBCASE("k=1 closed form") {
    const IntentionPointSet d{IntentKind::dynamic, {{8, 4}}};
    const IntentionPointSet s{IntentKind::static_, {{0, -4}}};
    KMeansConfig cfg;
    cfg.k = 1;
    const auto m = mixed_intents(d, s, {}, cfg);
    REQUIRE(m.k() == 1);
    CHECK(m.points[0].x == doctest::Approx(6.0));
    CHECK(m.points[0].y == doctest::Approx(2.0));
  }
  SUBCASE("kind mismatch") {
    const auto d = random_set(rng, IntentKind::dynamic);
    CHECK_THROWS_AS(mixed_intents(d, d), std::invalid_argument);
    const auto s = random_set(rng, IntentKind::static_);
    CHECK_THROWS_AS(mixed_intents(s, d), std::invalid_argument);
    CHECK_THROWS_AS(mixed_intents(d, s, {0.0, 1.0}), std::invalid_argument);
  }
}

TEST_CASE("collect_endpoints filters by class and validity") {
  Scenario s;
  s.scenario_id = "x";
  s.map = VectorMap({straight(1, {0, 0}, {1, 0}, 1)});
  s.tracks.push_back(moving_track(1, {0, 0}, 0.0, 1.0));
  s.tracks.push_back(moving_track(2, {0, 0}, 0.0, 1.0, ObjectClass::pedestrian));
  AgentTrack broken = moving_track(3, {0, 0}, 0.0, 1.0);
  broken.future.back().valid = false;
  s.tracks.push_back(broken);
  const std::vector<Scenario> all{s};
  const auto v = collect_endpoints(all, ObjectClass::vehicle);
  REQUIRE(v.size() == 1);
  CHECK(v[0].x == doctest::Approx(8.0));
  CHECK(collect_endpoints(all, ObjectClass::pedestrian).size() == 1);
  CHECK(collect_endpoints(all, ObjectClass::cyclist).empty());
}
