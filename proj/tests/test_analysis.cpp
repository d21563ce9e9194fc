#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "intentforge/analysis.hpp"
#include "test_support.hpp"

using namespace intentforge;
using testing::moving_track;
using testing::straight;
constexpr double kPi = std::numbers::pi;

namespace {

PredictionSet modes_from(AgentId id, const std::vector<std::vector<Vec2>>& trajs) {
  PredictionSet p;
  p.agent_id = id;
  for (const auto& t : trajs) p.modes.push_back({1.0 / trajs.size(), t});
  return p;
}

std::vector<Vec2> gt_points(const AgentTrack& t) {
  std::vector<Vec2> v;
  for (const auto& s : t.future) v.push_back(s.position);
  return v;
}

std::vector<Vec2> shifted(std::vector<Vec2> v, Vec2 d) {
  for (auto& p : v) p = p + d;
  return v;
}

std::vector<double> naive_ma(const std::vector<double>& x, std::size_t w) {
  std::vector<double> out;
  for (std::size_t i = 0; i + w <= x.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = i; j < i + w; ++j) s += x[j];
    out.push_back(s / w);
  }
  return out;
}

ReachabilitySet reach_all(const RoadGraph& g, std::vector<std::uint32_t> starts, double budget) {
  return reach_from(g, starts, budget);
}

}  // namespace

TEST_CASE("horizon steps and thresholds") {
  CHECK(horizon_step(Horizon::s3) == 29);
  CHECK(horizon_step(Horizon::s5) == 49);
  CHECK(horizon_step(Horizon::s8) == 79);
  CHECK(miss_thresholds(Horizon::s3).lateral == 1.0);
  CHECK(miss_thresholds(Horizon::s3).longitudinal == 2.0);
  CHECK(miss_thresholds(Horizon::s5).lateral == 1.8);
  CHECK(miss_thresholds(Horizon::s5).longitudinal == 3.6);
  CHECK(miss_thresholds(Horizon::s8).lateral == 3.0);
  CHECK(miss_thresholds(Horizon::s8).longitudinal == 6.0);
  CHECK(miss_speed_scale(0.0) == 0.5);
  CHECK(miss_speed_scale(1.4) == 0.5);
  CHECK(miss_speed_scale(6.2) == doctest::Approx(0.75));
  CHECK(miss_speed_scale(11.0) == 1.0);
  CHECK(miss_speed_scale(30.0) == 1.0);
}

TEST_CASE("min_fde") {
  const AgentTrack gt = moving_track(1, {0, 0}, 0.0, 10.0);
  const auto g = gt_points(gt);
  CHECK(min_fde(modes_from(1, {g}), gt, Horizon::s8) == 0.0);
  CHECK(min_fde(modes_from(1, {shifted(g, {0, 3}), shifted(g, {1, 0})}), gt, Horizon::s8) == 1.0);
  AgentTrack broken = gt;
  broken.future[79].valid = false;
  CHECK_THROWS_AS(min_fde(modes_from(1, {g}), broken, Horizon::s8), std::invalid_argument);
  CHECK_NOTHROW(min_fde(modes_from(1, {g}), broken, Horizon::s5));
}

TEST_CASE("min_ade") {
  const AgentTrack gt = moving_track(1, {0, 0}, 0.3, 10.0);
  const auto g = gt_points(gt);
  CHECK(min_ade(modes_from(1, {g}), gt, Horizon::s8) == 0.0);
  CHECK(min_ade(modes_from(1, {shifted(g, {0, 2})}), gt, Horizon::s8) == doctest::Approx(2.0));
  AgentTrack none = gt;
  for (auto& s : none.future) s.valid = false;
  CHECK_THROWS_AS(min_ade(modes_from(1, {g}), none, Horizon::s3), std::invalid_argument);
}

TEST_CASE("min_fde / min_ade against brute force; min_ade sanity bound") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    AgentTrack gt = moving_track(1, {0, 0}, testing::uniform(rng, -3, 3), testing::uniform(rng, 0, 20));
    for (auto& s : gt.future) {
      if (testing::uniform(rng, 0, 1) < 0.1) s.valid = false;
    }
    gt.future[79].valid = true;
    std::vector<std::vector<Vec2>> trajs;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int m = 0; m < n; ++m) {
      std::vector<Vec2> t;
      for (const auto& s : gt.future) t.push_back(s.position + Vec2{testing::uniform(rng, -5, 5), testing::uniform(rng, -5, 5)});
      trajs.push_back(t);
    }
    const auto pred = modes_from(1, trajs);
    double fde = 1e300, ade = 1e300;
    std::size_t arg = 0;
    for (std::size_t m = 0; m < trajs.size(); ++m) {
      fde = std::min(fde, distance(trajs[m][79], gt.future[79].position));
      double sum = 0.0;
      int cnt = 0;
      for (int i = 0; i < 80; ++i) {
        if (!gt.future[i].valid) continue;
        sum += distance(trajs[m][i], gt.future[i].position);
        ++cnt;
      }
      if (sum / cnt < ade) {
        ade = sum / cnt;
        arg = m;
      }
    }
    CHECK(min_fde(pred, gt, Horizon::s8) == fde);
    CHECK(min_ade(pred, gt, Horizon::s8) == doctest::Approx(ade).epsilon(1e-12));
    double max_step = 0.0;
    for (int i = 0; i < 80; ++i) {
      if (gt.future[i].valid) max_step = std::max(max_step, distance(trajs[arg][i], gt.future[i].position));
    }
    CHECK(min_ade(pred, gt, Horizon::s8) <= max_step + 1e-12);
  }
}

TEST_CASE("miss_rate") {
  const AgentTrack gt = moving_track(1, {0, 0}, 0.0, 12.0);  // scale 1
  const auto g = gt_points(gt);
  CHECK(miss_rate(modes_from(1, {g}), gt, Horizon::s8) == 0);
  CHECK(miss_rate(modes_from(1, {shifted(g, {50, 0}), shifted(g, {0, -50})}), gt, Horizon::s8) == 1);
  // the box is inclusive on its boundary
  CHECK(miss_rate(modes_from(1, {shifted(g, {6.0, 3.0})}), gt, Horizon::s8) == 0);
  CHECK(miss_rate(modes_from(1, {shifted(g, {6.0, 3.001})}), gt, Horizon::s8) == 1);
  CHECK(miss_rate(modes_from(1, {shifted(g, {6.001, 0.0})}), gt, Horizon::s8) == 1);

  // oriented by the GT heading: northbound, longitudinal is +y
  const AgentTrack north = moving_track(1, {0, 0}, kPi / 2, 12.0);
  const auto gn = gt_points(north);
  CHECK(miss_rate(modes_from(1, {shifted(gn, {0.0, 5.5})}), north, Horizon::s8) == 0);
  CHECK(miss_rate(modes_from(1, {shifted(gn, {5.5, 0.0})}), north, Horizon::s8) == 1);

  // slow agents get half-size boxes
  const AgentTrack slow = moving_track(1, {0, 0}, 0.0, 1.0);
  const auto gs = gt_points(slow);
  CHECK(miss_rate(modes_from(1, {shifted(gs, {0.0, 1.5})}), slow, Horizon::s8) == 0);
  CHECK(miss_rate(modes_from(1, {shifted(gs, {0.0, 1.6})}), slow, Horizon::s8) == 1);
  CHECK(miss_rate(modes_from(1, {shifted(gs, {0.0, 0.5})}), slow, Horizon::s3) == 0);
  CHECK(miss_rate(modes_from(1, {shifted(gs, {0.0, 0.6})}), slow, Horizon::s3) == 1);
}

TEST_CASE("prediction set invariants") {
  const AgentTrack gt = moving_track(1, {0, 0}, 0.0, 10.0);
  auto p = modes_from(1, {gt_points(gt)});
  CHECK_NOTHROW(p.validate());
  p.modes[0].confidence = 1.2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = modes_from(1, std::vector<std::vector<Vec2>>(7, gt_points(gt)));
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = modes_from(1, {gt_points(gt)});
  p.modes[0].points.pop_back();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("gt_deviation: on-node and perpendicular offset") {
  const VectorMap m({straight(1, {0, 0}, {100, 0}, 200)});
  const RoadGraph g = build_graph(m);
  const auto r = reach_all(g, {0}, 8.0);

  AgentTrack on = moving_track(1, {0, 0}, 0.0, 0.0);
  on.future[79].position = {20.0, 0.0};
  CHECK(gt_deviation(on, r, g, DeviationMode::node) == 0.0);
  CHECK(gt_deviation(on, r, g, DeviationMode::polyline) == 0.0);

  AgentTrack off = on;
  off.future[79].position = {20.25, 2.5};
  const double node = gt_deviation(off, r, g, DeviationMode::node);
  CHECK(node == doctest::Approx(std::sqrt(2.5 * 2.5 + 0.25 * 0.25)));
  CHECK(node >= 2.5);
  CHECK(node <= 2.5125);
  CHECK(gt_deviation(off, r, g, DeviationMode::polyline) == doctest::Approx(2.5).epsilon(1e-12));

  CHECK_THROWS_AS(gt_deviation(off, ReachabilitySet{}, g), std::invalid_argument);
  off.future[79].valid = false;
  CHECK_THROWS_AS(gt_deviation(off, r, g), std::invalid_argument);
}

TEST_CASE("gt_deviation equals brute-force scans; polyline <= node <= polyline + spacing/2") {
  std::vector<LaneSegment> segs{straight(1, {0, 0}, {50, 0}, 100), straight(2, {50, 0}, {80, 30}, 85),
                                straight(3, {50, 0}, {80, -10}, 64), straight(4, {0, 3.5}, {50, 3.5}, 100)};
  testing::link(segs, 1, 2);
  testing::link(segs, 1, 3);
  segs[0].left = NeighborRef{4, true};
  segs[3].right = NeighborRef{1, false};
  const VectorMap m(segs);
  const RoadGraph g = build_graph(m);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const auto start = static_cast<std::uint32_t>(rng() % g.node_count());
    const auto r = reach_all(g, {start}, testing::uniform(rng, 0.0, 4.0));
    AgentTrack t = moving_track(1, {0, 0}, 0.0, 0.0);
    t.future[79].position = {testing::uniform(rng, -10, 90), testing::uniform(rng, -20, 40)};
    const Vec2 p = t.future[79].position;

    double node2 = 1e300;
    for (const auto& e : r.entries) {
      const double dx = p.x - e.position.x, dy = p.y - e.position.y;
      node2 = std::min(node2, dx * dx + dy * dy);
    }
    const double node = gt_deviation(t, r, g, DeviationMode::node);
    CHECK(node == std::sqrt(node2));

    std::vector<char> in(g.node_count(), 0);
    for (const auto& e : r.entries) in[e.index] = 1;
    double poly = std::sqrt(node2);
    for (std::size_t i = 0; i + 1 < g.node_count(); ++i) {
      if (in[i] && in[i + 1] && g.node(i).segment == g.node(i + 1).segment) {
        poly = std::min(poly, point_to_segment_distance(p, g.position(i), g.position(i + 1)));
      }
    }
    const double pl = gt_deviation(t, r, g, DeviationMode::polyline);
    CHECK(pl == poly);
    CHECK(pl <= node);
    CHECK(node <= pl + 0.5 / 2 + 1e-9);
  }
}

TEST_CASE("detect_parked") {
  CHECK(detect_parked(moving_track(1, {0, 0}, 0.0, 0.0)));
  CHECK_FALSE(detect_parked(moving_track(1, {0, 0}, 0.0, 10.0)));
  CHECK(detect_parked(moving_track(1, {0, 0}, 0.0, 0.99 / 8.0)));
  CHECK_FALSE(detect_parked(moving_track(1, {0, 0}, 0.0, 1.01 / 8.0)));
  AgentTrack t = moving_track(1, {0, 0}, 0.0, 10.0);
  for (int i = 20; i < 80; ++i) t.future[i].valid = false;
  CHECK_FALSE(detect_parked(t));
}

TEST_CASE("plausible_ground_truth") {
  CHECK(plausible_ground_truth(moving_track(1, {0, 0}, 0.0, 30.0)));
  AgentTrack t = moving_track(1, {0, 0}, 0.0, 10.0);
  t.future[40].position = t.future[40].position + Vec2{10, 0};
  CHECK_FALSE(plausible_ground_truth(t));
  t = moving_track(1, {0, 0}, 0.0, 10.0);
  t.future[79].valid = false;
  CHECK_FALSE(plausible_ground_truth(t));
  // gaps stretch the time step
  t = moving_track(1, {0, 0}, 0.0, 50.0);
  t.future[10].valid = false;
  CHECK(plausible_ground_truth(t));
  CHECK_FALSE(plausible_ground_truth(moving_track(1, {0, 0}, 0.0, 61.0)));
}

TEST_CASE("filter_dataset on a hand-enumerated 20-track suite") {
  Scenario s;
  s.scenario_id = "filter";
  s.map = VectorMap({straight(1, {-200, 0}, {200, 0}, 800)});
  AgentId id = 0;
  auto add = [&](AgentTrack t, bool predict = true) {
    t.agent_id = ++id;
    s.tracks.push_back(t);
    if (predict) s.tracks_to_predict.push_back(t.agent_id);
  };
  // 5 pedestrians + 2 cyclists, one of them off-road with broken GT
  for (int i = 0; i < 4; ++i) add(moving_track(0, {0, 0}, 0.0, 1.0, ObjectClass::pedestrian));
  AgentTrack odd = moving_track(0, {0, -8}, 0.0, 1.0, ObjectClass::pedestrian);
  odd.future[79].valid = false;
  add(odd);
  for (int i = 0; i < 2; ++i) add(moving_track(0, {0, 0}, 0.0, 5.0, ObjectClass::cyclist));
  // 3 vehicles 6 m off-road, plus one also with broken GT
  for (int i = 0; i < 3; ++i) add(moving_track(0, {-10.0 * i, 6.0}, 0.0, 5.0));
  AgentTrack lost = moving_track(0, {0, -6.0}, 0.0, 5.0);
  lost.future[79].valid = false;
  add(lost);
  // 2 with invalid 8 s state, 1 teleporting
  for (int i = 0; i < 2; ++i) {
    AgentTrack t = moving_track(0, {0, 0.5}, 0.0, 10.0);
    t.future[79].valid = false;
    add(t);
  }
  AgentTrack jump = moving_track(0, {0, 0}, 0.0, 10.0);
  jump.future[30].position = jump.future[30].position + Vec2{0, 8};
  add(jump);
  // 6 good vehicles, one with an interior gap
  for (int i = 0; i < 6; ++i) {
    AgentTrack t = moving_track(0, {-50.0 + 10 * i, 0.2}, 0.0, 10.0);
    if (i == 0) t.future[10].valid = false;
    add(t);
  }
  // not predicted: never counted
  add(moving_track(0, {0, 0}, 0.0, 1.0, ObjectClass::pedestrian), false);
  add(moving_track(0, {0, 30}, 0.0, 1.0), false);
  REQUIRE(s.tracks_to_predict.size() == 20);
  validate(s);

  const std::vector<Scenario> all{s};
  const FilterResult f = filter_dataset(all);
  CHECK(f.report.total == 20);
  CHECK(f.report.excluded_non_vehicle == 7);
  CHECK(f.report.excluded_no_dynamic == 4);
  CHECK(f.report.excluded_invalid_gt == 3);
  CHECK(f.report.remaining == 6);
  CHECK(f.report.consistent());
  REQUIRE(f.agents.size() == 6);
  CHECK(f.agents[0].agent_id == 15);
  for (const auto& a : f.agents) CHECK_FALSE(a.association.fallback);
}

TEST_CASE("moving_average") {
  const std::vector<double> c(10, 4.25);
  for (double v : moving_average(c, 4)) CHECK(v == 4.25);
  const std::vector<double> x{3, 1, 4, 1, 5};
  CHECK(moving_average(x, 1) == x);
  const std::vector<double> ramp{1, 2, 3, 4};
  CHECK(moving_average(ramp, 2) == std::vector<double>{1.5, 2.5, 3.5});
  CHECK(moving_average(ramp, 4).size() == 1);
  CHECK_THROWS_AS(moving_average(ramp, 5), std::invalid_argument);
  CHECK_THROWS_AS(moving_average(ramp, 0), std::invalid_argument);
}

TEST_CASE("moving_average equals the naive oracle and shifts with a constant") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(1 + rng() % 300);
    for (auto& v : x) v = testing::uniform(rng, -100, 100);
    const std::size_t w = 1 + rng() % x.size();
    const auto fast = moving_average(x, w);
    const auto slow = naive_ma(x, w);
    REQUIRE(fast.size() == slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
    const double cst = testing::uniform(rng, -50, 50);
    std::vector<double> y = x;
    for (auto& v : y) v += cst;
    const auto shifted_ma = moving_average(y, w);
    for (std::size_t i = 0; i < fast.size(); ++i) CHECK(shifted_ma[i] == doctest::Approx(fast[i] + cst).epsilon(1e-12));
  }
}

TEST_CASE("deviation_curve") {
  const std::vector<std::string> two{"a", "b"};
  SUBCASE("flat curve") {
    std::vector<DeviationRecord> recs;
    for (int i = 0; i < 20; ++i) recs.push_back({"s", i, 0.0, {1.5, 1.5}, false});
    const auto c = deviation_curve(recs, two, 5);
    REQUIRE(c.rows.size() == 16);
    for (const auto& r : c.rows) {
      CHECK(r.smoothed_min_fde[0] == 1.5);
      CHECK(r.deviation == 0.0);
    }
    CHECK(c.rows.front().rank == 4);
    CHECK(c.rows.back().rank == 19);
  }
  SUBCASE("constant gap between models is preserved") {
    std::mt19937_64 rng(6);
    std::vector<DeviationRecord> recs;
    for (int i = 0; i < 200; ++i) {
      const double b = testing::uniform(rng, 0, 10);
      recs.push_back({"s", i, testing::uniform(rng, 0, 5), {b - 0.2, b}, false});
    }
    const auto c = deviation_curve(recs, two, 25);
    for (const auto& r : c.rows) CHECK(r.smoothed_min_fde[1] - r.smoothed_min_fde[0] == doctest::Approx(0.2));
  }
  SUBCASE("random records against the naive oracle, window 3") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<DeviationRecord> recs;
      const int n = 3 + static_cast<int>(rng() % 50);
      for (int i = 0; i < n; ++i) {
        recs.push_back({"s" + std::to_string(rng() % 3), i, std::floor(testing::uniform(rng, 0, 4)),
                        {testing::uniform(rng, 0, 9)}, false});
      }
      const std::vector<std::string> one{"m"};
      const auto c = deviation_curve(recs, one, 3);
      auto sorted = recs;
      std::sort(sorted.begin(), sorted.end(), [](const DeviationRecord& a, const DeviationRecord& b) {
        return std::tie(a.deviation, a.scenario_id, a.agent_id) < std::tie(b.deviation, b.scenario_id, b.agent_id);
      });
      std::vector<double> col;
      for (const auto& r : sorted) col.push_back(r.min_fde_8s[0]);
      const auto oracle = naive_ma(col, 3);
      REQUIRE(c.rows.size() == oracle.size());
      for (std::size_t i = 0; i < oracle.size(); ++i) {
        CHECK(c.rows[i].smoothed_min_fde[0] == doctest::Approx(oracle[i]).epsilon(1e-12));
        CHECK(c.rows[i].deviation == sorted[i + 2].deviation);
      }
    }
  }
  SUBCASE("exclude parked and window errors") {
    std::vector<DeviationRecord> recs;
    for (int i = 0; i < 10; ++i) recs.push_back({"s", i, 1.0 * i, {100.0 * (i % 2)}, i % 2 == 1});
    const std::vector<std::string> one{"m"};
    const auto c = deviation_curve(recs, one, 5, true);
    REQUIRE(c.rows.size() == 1);
    CHECK(c.rows[0].smoothed_min_fde[0] == 0.0);
    CHECK_THROWS_AS(deviation_curve(recs, one, 6, true), std::invalid_argument);
    CHECK_THROWS_AS(deviation_curve(recs, one, 11), std::invalid_argument);
    CHECK_THROWS_AS(deviation_curve(recs, two, 2), std::invalid_argument);
  }
}

TEST_CASE("coverage") {
  const IntentionPointSet s{IntentKind::static_, {{99, 0}, {0, 0}, {50, 50}}};
  CHECK(coverage(s, {0, 0}) == 0.0);
  CHECK(coverage(s, {100, 0}) == 1.0);
  CHECK(std::isinf(coverage(IntentionPointSet{}, {0, 0})));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    IntentionPointSet r{IntentKind::dynamic, {}};
    for (int i = 0; i < 64; ++i) r.points.push_back({testing::uniform(rng, -50, 50), testing::uniform(rng, -50, 50)});
    const Vec2 q{testing::uniform(rng, -60, 60), testing::uniform(rng, -60, 60)};
    double best2 = 1e300;
    for (Vec2 p : r.points) {
      const double dx = q.x - p.x, dy = q.y - p.y;
      best2 = std::min(best2, dx * dx + dy * dy);
    }
    CHECK(coverage(r, q) == std::sqrt(best2));
  }
}

TEST_CASE("on-graph endpoint: dynamic coverage within the max cluster radius") {
  std::vector<LaneSegment> segs{straight(1, {0, 0}, {60, 0}, 120), straight(2, {60, 0}, {160, 0}, 200),
                                straight(3, {60, 0}, {60, 100}, 200)};
  testing::link(segs, 1, 2);
  testing::link(segs, 1, 3);
  const VectorMap m(segs);
  const RoadGraph g = build_graph(m);
  for (double v : {5.0, 10.0, 12.5}) {
    const AgentTrack t = moving_track(1, {10, 0}, 0.0, v);
    const auto r = reach(g, associate(m, t));
    const auto dyn = dynamic_intents(r, t);
    double radius = 0.0;
    for (const auto& e : r.entries) radius = std::max(radius, coverage(dyn, to_agent_frame(e.position, t)));
    const Vec2 end = *gt_endpoint_agent_frame(t);
    CHECK(coverage(dyn, end) <= radius);
  }
}
