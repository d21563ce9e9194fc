#include "intentforge/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace intentforge {

namespace {

constexpr double kSpacing = 0.49;
constexpr double kLaneWidth = 3.75;
constexpr double kHalfLane = kLaneWidth / 2.0;
constexpr double kPi = std::numbers::pi;
constexpr double kDt = 1.0 / kStepsPerSecond;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(gen_() >> 11) * 0x1.0p-53);
  }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform(0.0, 1.0) * n) % n; }
  bool chance(double p) { return uniform(0.0, 1.0) < p; }
  std::uint64_t next() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

Vec2 quantized(Vec2 p) { return {quantize(p.x), quantize(p.y)}; }

std::vector<Vec2> sample_line(Vec2 a, Vec2 b) {
  const double len = distance(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len / kSpacing)));
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) pts.push_back(a + (static_cast<double>(i) / n) * (b - a));
  pts.push_back(b);
  return pts;
}

// Arc around `center`, angles in radians, sweeping from a0 to a1 (either sign).
std::vector<Vec2> sample_arc(Vec2 center, double radius, double a0, double a1) {
  const double len = radius * std::abs(a1 - a0);
  const int n = std::max(1, static_cast<int>(std::ceil(len / kSpacing)));
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * static_cast<double>(i) / n;
    pts.push_back(center + radius * Vec2{std::cos(a), std::sin(a)});
  }
  return pts;
}

// Exact quarter-turn rotations keep rotated templates free of trig noise.
Vec2 quarter_turns(Vec2 p, int turns) {
  for (int i = 0; i < ((turns % 4) + 4) % 4; ++i) p = {-p.y, p.x};
  return p;
}

std::vector<Vec2> quarter_turns(std::vector<Vec2> pts, int turns) {
  for (auto& p : pts) p = quarter_turns(p, turns);
  return pts;
}

class MapBuilder {
 public:
  explicit MapBuilder(double speed_limit) : speed_limit_(quantize(speed_limit)) {}

  SegmentId add(SegmentId id, const std::vector<Vec2>& raw) {
    std::vector<Vec2> pts;
    for (Vec2 p : raw) {
      const Vec2 q = quantized(p);
      if (pts.empty() || !(pts.back() == q)) pts.push_back(q);
    }
    segments_[id] = make_segment(id, pts, speed_limit_);
    return id;
  }

  void link(SegmentId from, SegmentId to) {
    segments_.at(from).exit_ids.push_back(to);
    segments_.at(to).entry_ids.push_back(from);
  }

  // `right_id` lies to the right of `left_id`.
  void side_by_side(SegmentId left_id, SegmentId right_id, bool change_ok) {
    segments_.at(right_id).left = NeighborRef{left_id, change_ok};
    segments_.at(left_id).right = NeighborRef{right_id, change_ok};
  }

  const LaneSegment& segment(SegmentId id) const { return segments_.at(id); }

  std::vector<Vec2> route_points(const std::vector<SegmentId>& route) const {
    std::vector<Vec2> pts;
    for (SegmentId id : route) {
      for (const auto& n : segments_.at(id).nodes) {
        if (pts.empty() || !(pts.back() == n.position)) pts.push_back(n.position);
      }
    }
    return pts;
  }

  // Follows random exits until the route is at least `min_length` long.
  std::vector<SegmentId> random_route(SegmentId start, double min_length, Rng& rng) const {
    std::vector<SegmentId> route{start};
    double length = segments_.at(start).length();
    while (length < min_length) {
      const auto& exits = segments_.at(route.back()).exit_ids;
      if (exits.empty()) break;
      route.push_back(exits[rng.index(exits.size())]);
      length += segments_.at(route.back()).length();
    }
    return route;
  }

  VectorMap build() const {
    std::vector<LaneSegment> segs;
    for (const auto& [id, s] : segments_) segs.push_back(s);
    return VectorMap(std::move(segs));
  }

 private:
  double speed_limit_;
  std::map<SegmentId, LaneSegment> segments_;
};

class Path {
 public:
  explicit Path(const std::vector<Vec2>& waypoints) {
    for (Vec2 p : waypoints) {
      if (pts_.empty() || !(pts_.back() == p)) pts_.push_back(p);
    }
    if (pts_.size() < 2) throw std::logic_error("path needs two distinct points");
    cum_.push_back(0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) cum_.push_back(cum_.back() + distance(pts_[i - 1], pts_[i]));
  }

  double length() const { return cum_.back(); }

  Vec2 at(double s) const {
    const std::size_t i = piece(s);
    const double t = (s - cum_[i]) / (cum_[i + 1] - cum_[i]);
    return pts_[i] + t * (pts_[i + 1] - pts_[i]);
  }

  double heading_at(double s) const {
    const std::size_t i = piece(s);
    return heading_of(pts_[i + 1] - pts_[i]);
  }

 private:
  std::size_t piece(double s) const {
    if (s < 0.0 || s > length() + 1e-9) throw std::logic_error("path sampled outside its length");
    auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    std::size_t i = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
    return std::min(i, pts_.size() - 2);
  }

  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

AgentTrack make_track(AgentId id, ObjectClass cls, const Path& path, double s_current,
                      double speed, double still_heading) {
  AgentTrack t;
  t.agent_id = id;
  t.object_class = cls;
  t.length = cls == ObjectClass::vehicle ? 4.5 : 0.8;
  t.width = cls == ObjectClass::vehicle ? 2.0 : 0.8;
  auto state = [&](int step, double s) {
    AgentState st;
    st.timestamp_index = step;
    st.position = quantized(path.at(s));
    st.heading = quantize(speed > 0.0 ? path.heading_at(s) : still_heading);
    st.speed = quantize(speed);
    st.valid = true;
    return st;
  };
  for (int k = 0; k < kHistorySteps; ++k) {
    t.history.push_back(state(k, s_current - (kHistorySteps - 1 - k) * kDt * speed));
  }
  for (int j = 0; j < kFutureSteps; ++j) {
    t.future.push_back(state(kHistorySteps + j, s_current + (j + 1) * kDt * speed));
  }
  return t;
}

struct Layout {
  MapBuilder map;
  std::vector<SegmentId> lane_starts;  // where lane-following agents begin
  Vec2 sidewalk_from;
  Vec2 sidewalk_to;
};

Layout straight_layout(double limit) {
  Layout l{MapBuilder(limit), {1, 11, 21}, {-10.0, -6.0}, {120.0, -6.0}};
  for (int i = 0; i < 3; ++i) {
    const double x0 = 100.0 * i;
    l.map.add(1 + i, sample_line({x0, 0.0}, {x0 + 100.0, 0.0}));
    l.map.add(11 + i, sample_line({x0, kLaneWidth}, {x0 + 100.0, kLaneWidth}));
    l.map.add(21 + i, sample_line({300.0 - x0, 2 * kLaneWidth}, {200.0 - x0, 2 * kLaneWidth}));
    l.map.side_by_side(11 + i, 1 + i, true);
  }
  for (int i = 0; i < 2; ++i) {
    l.map.link(1 + i, 2 + i);
    l.map.link(11 + i, 12 + i);
    l.map.link(21 + i, 22 + i);
  }
  return l;
}

// Direction d = 0..3 travels north, west, south, east (quarter turns of the
// northbound approach). Per direction: inbound 100d+1, outbound 100d+2,
// through 100d+3, left 100d+4, right 100d+5.
Layout intersection_layout(double limit) {
  Layout l{MapBuilder(limit), {1, 101, 201, 301}, {-40.0, -14.0}, {-14.0, -40.0}};
  constexpr double kBox = 10.0;
  constexpr double kArm = 110.0;
  for (int d = 0; d < 4; ++d) {
    const SegmentId base = 100 * d;
    l.map.add(base + 1, quarter_turns(sample_line({kHalfLane, -kArm}, {kHalfLane, -kBox}), d));
    l.map.add(base + 2, quarter_turns(sample_line({kHalfLane, kBox}, {kHalfLane, kArm}), d));
    l.map.add(base + 3, quarter_turns(sample_line({kHalfLane, -kBox}, {kHalfLane, kBox}), d));
    l.map.add(base + 4, quarter_turns(sample_arc({-kBox, -kBox}, kBox + kHalfLane, 0.0, kPi / 2), d));
    l.map.add(base + 5, quarter_turns(sample_arc({kBox, -kBox}, kBox - kHalfLane, kPi, kPi / 2), d));
  }
  for (int d = 0; d < 4; ++d) {
    const SegmentId base = 100 * d;
    l.map.link(base + 1, base + 3);
    l.map.link(base + 1, base + 4);
    l.map.link(base + 1, base + 5);
    l.map.link(base + 3, base + 2);
    l.map.link(base + 4, 100 * ((d + 1) % 4) + 2);
    l.map.link(base + 5, 100 * ((d + 3) % 4) + 2);
  }
  return l;
}

// Approach 1 splits into a left turn (2 -> 3) and a U-turn (4 -> 5); lane 6 -> 7
// runs straight on the right of the approach.
Layout uturn_layout(double limit) {
  Layout l{MapBuilder(limit), {1, 6}, {10.0, -60.0}, {10.0, 20.0}};
  l.map.add(1, sample_line({0.0, -110.0}, {0.0, 0.0}));
  l.map.add(2, sample_arc({-15.0, 0.0}, 15.0, 0.0, kPi / 2));
  l.map.add(3, sample_line({-15.0, 15.0}, {-115.0, 15.0}));
  l.map.add(4, sample_arc({-5.0, 0.0}, 5.0, 0.0, kPi));
  l.map.add(5, sample_line({-10.0, 0.0}, {-10.0, -110.0}));
  l.map.add(6, sample_line({kLaneWidth, -110.0}, {kLaneWidth, 0.0}));
  l.map.add(7, sample_line({kLaneWidth, 0.0}, {kLaneWidth, 110.0}));
  l.map.link(1, 2);
  l.map.link(1, 4);
  l.map.link(2, 3);
  l.map.link(4, 5);
  l.map.link(6, 7);
  l.map.side_by_side(1, 6, true);
  return l;
}

// Main road A1 -> A2 with ramp 5 joining A2; lanes B1 -> B2 on the left, lane
// changes between A and B prohibited.
Layout merge_layout(double limit) {
  Layout l{MapBuilder(limit), {1, 3, 5}, {-60.0, -30.0}, {60.0, -12.0}};
  l.map.add(1, sample_line({-110.0, 0.0}, {0.0, 0.0}));
  l.map.add(2, sample_line({0.0, 0.0}, {200.0, 0.0}));
  l.map.add(3, sample_line({-110.0, kLaneWidth}, {0.0, kLaneWidth}));
  l.map.add(4, sample_line({0.0, kLaneWidth}, {200.0, kLaneWidth}));
  l.map.add(5, sample_line({-80.0, -20.0}, {0.0, 0.0}));
  l.map.link(1, 2);
  l.map.link(5, 2);
  l.map.link(3, 4);
  l.map.side_by_side(3, 1, false);
  l.map.side_by_side(4, 2, false);
  return l;
}

// Eastbound 1 -> 2 and westbound 3 -> 4; unmapped parking area for y < -6.
Layout parking_layout(double limit) {
  Layout l{MapBuilder(limit), {1, 3}, {-60.0, -4.0}, {60.0, -4.0}};
  l.map.add(1, sample_line({-110.0, 0.0}, {0.0, 0.0}));
  l.map.add(2, sample_line({0.0, 0.0}, {200.0, 0.0}));
  l.map.add(3, sample_line({200.0, kLaneWidth}, {0.0, kLaneWidth}));
  l.map.add(4, sample_line({0.0, kLaneWidth}, {-110.0, kLaneWidth}));
  l.map.link(1, 2);
  l.map.link(3, 4);
  return l;
}

Layout make_layout(Template t, double limit) {
  switch (t) {
    case Template::straight:
      return straight_layout(limit);
    case Template::intersection_4way:
      return intersection_layout(limit);
    case Template::uturn_split:
      return uturn_layout(limit);
    case Template::merge:
      return merge_layout(limit);
    case Template::parking_adjacent:
      return parking_layout(limit);
  }
  throw std::invalid_argument("unknown template");
}

AgentTrack follow_lane_agent(const Layout& l, AgentId id, double limit, Rng& rng) {
  const SegmentId start = l.lane_starts[rng.index(l.lane_starts.size())];
  const double v = limit * rng.uniform(0.5, 1.0);
  const double s_current = v * 1.0 + rng.uniform(1.0, 40.0);
  const double need = s_current + v * (kFutureSteps * kDt) + 5.0;
  const Path path(l.map.route_points(l.map.random_route(start, need, rng)));
  return make_track(id, ObjectClass::vehicle, path, s_current, v, 0.0);
}

AgentTrack primary_agent(const GenSpec& spec, const Layout& l, AgentId id, Rng& rng) {
  const double limit = spec.speed_limit_mps;
  switch (spec.agent_behavior) {
    case Behavior::follow_lane:
      return follow_lane_agent(l, id, limit, rng);

    case Behavior::corner_cut: {
      if (spec.layout == Template::intersection_4way) {
        // Drifting off the northbound through lane mid-intersection: the
        // eastbound through lane is nearer but crosses at a right angle.
        const Vec2 p{3.875, -2.875};
        const double h = 100.0 * kPi / 180.0;
        const double v = rng.uniform(4.0, 6.0);
        const Vec2 back = p - (v * 1.5) * Vec2{std::cos(h), std::sin(h)};
        const Path path({back, p, {kHalfLane, 10.0}, {kHalfLane, 110.0}});
        return make_track(id, ObjectClass::vehicle, path, v * 1.5, v, h);
      }
      // Cutting the left-turn corner: nearest to the U-turn branch, with the
      // left-turn branch still within reach.
      const Vec2 p = Vec2{-15.0, 0.0} + 13.0 * Vec2{std::cos(kPi / 12), std::sin(kPi / 12)};
      const double h = 120.0 * kPi / 180.0;
      const double v = rng.uniform(5.0, 7.0);
      const Vec2 back = p - (v * 1.5) * Vec2{std::cos(h), std::sin(h)};
      const Path path({back, p, {-7.5, 15.0 * std::sin(kPi / 3)}, {-15.0, 15.0}, {-115.0, 15.0}});
      return make_track(id, ObjectClass::vehicle, path, v * 1.5, v, h);
    }

    case Behavior::illegal_uturn: {
      // U-turn from the left eastbound lane across into the westbound lane.
      const double xc = rng.uniform(60.0, 90.0);
      const double v = rng.uniform(4.5, 5.5);
      std::vector<Vec2> wp{{xc - v - 1.0, kLaneWidth}, {xc + 3.0, kLaneWidth}};
      const auto arc = sample_arc({xc + 3.0, 1.5 * kLaneWidth}, kHalfLane, -kPi / 2, kPi / 2);
      wp.insert(wp.end(), arc.begin() + 1, arc.end());
      wp.push_back({0.0, 2 * kLaneWidth});
      return make_track(id, ObjectClass::vehicle, Path(wp), v + 1.0, v, 0.0);
    }

    case Behavior::lane_merge_violation: {
      // Ramp merge that crosses the solid line straight into lane B2.
      const double v = rng.uniform(10.0, 12.0);
      const double s_current = rng.uniform(30.0, 40.0);
      std::vector<Vec2> wp = l.map.route_points({5});
      wp.push_back({15.0, kLaneWidth});
      wp.push_back({200.0, kLaneWidth});
      return make_track(id, ObjectClass::vehicle, Path(wp), s_current, v, 0.0);
    }

    case Behavior::offroad_parking: {
      const double x0 = rng.uniform(-40.0, 40.0);
      const double y0 = -6.5;
      const double v = rng.chance(0.5) ? 0.0 : 1.0;
      const Path path({{x0 - 2.0, y0}, {x0 + 20.0, y0}});
      return make_track(id, ObjectClass::vehicle, path, 2.0, v, 0.0);
    }
  }
  throw std::invalid_argument("unknown behavior");
}

}  // namespace

std::string_view to_string(Template t) {
  switch (t) {
    case Template::straight:
      return "straight";
    case Template::intersection_4way:
      return "intersection_4way";
    case Template::uturn_split:
      return "uturn_split";
    case Template::merge:
      return "merge";
    case Template::parking_adjacent:
      return "parking_adjacent";
  }
  return "straight";
}

std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::follow_lane:
      return "follow_lane";
    case Behavior::corner_cut:
      return "corner_cut";
    case Behavior::illegal_uturn:
      return "illegal_uturn";
    case Behavior::offroad_parking:
      return "offroad_parking";
    case Behavior::lane_merge_violation:
      return "lane_merge_violation";
  }
  return "follow_lane";
}

std::optional<Template> parse_template(std::string_view s) {
  for (auto t : {Template::straight, Template::intersection_4way, Template::uturn_split,
                 Template::merge, Template::parking_adjacent}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

std::optional<Behavior> parse_behavior(std::string_view s) {
  for (auto b : {Behavior::follow_lane, Behavior::corner_cut, Behavior::illegal_uturn,
                 Behavior::offroad_parking, Behavior::lane_merge_violation}) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

std::vector<Behavior> supported_behaviors(Template t) {
  switch (t) {
    case Template::straight:
      return {Behavior::follow_lane, Behavior::illegal_uturn};
    case Template::intersection_4way:
      return {Behavior::follow_lane, Behavior::corner_cut};
    case Template::uturn_split:
      return {Behavior::follow_lane, Behavior::corner_cut};
    case Template::merge:
      return {Behavior::follow_lane, Behavior::lane_merge_violation};
    case Template::parking_adjacent:
      return {Behavior::follow_lane, Behavior::offroad_parking};
  }
  return {};
}

bool is_supported(Template t, Behavior b) {
  const auto all = supported_behaviors(t);
  return std::find(all.begin(), all.end(), b) != all.end();
}

bool is_legal(Behavior b) { return b == Behavior::follow_lane || b == Behavior::corner_cut; }

Scenario generate(const GenSpec& spec) {
  if (!is_supported(spec.layout, spec.agent_behavior)) {
    throw std::invalid_argument("unsupported combination: " + std::string(to_string(spec.layout)) +
                                " + " + std::string(to_string(spec.agent_behavior)));
  }
  if (!(spec.speed_limit_mps > 0.0)) throw std::invalid_argument("speed limit must be positive");
  Rng rng(spec.seed);
  const Layout layout = make_layout(spec.layout, spec.speed_limit_mps);

  Scenario s;
  s.scenario_id = std::string(to_string(spec.layout)) + "-" +
                  std::string(to_string(spec.agent_behavior)) + "-" + std::to_string(spec.seed);
  s.map = layout.map.build();
  AgentId next = spec.agent_id_base + 1;
  s.tracks.push_back(primary_agent(spec, layout, next++, rng));
  if (spec.background_agents) {
    const std::size_t vehicles = rng.index(3);
    for (std::size_t i = 0; i < vehicles; ++i) {
      s.tracks.push_back(follow_lane_agent(layout, next++, spec.speed_limit_mps, rng));
    }
    if (rng.chance(0.3)) {
      const double v = rng.uniform(1.0, 1.6);
      const Path walk({layout.sidewalk_from, layout.sidewalk_to});
      s.tracks.push_back(make_track(next++, ObjectClass::pedestrian, walk, v * 1.0 + 1.0, v, 0.0));
    }
  }
  for (const auto& t : s.tracks) s.tracks_to_predict.push_back(t.agent_id);
  validate(s);
  return s;
}

std::vector<Scenario> generate_suite(int n, std::uint64_t seed, const SuiteOptions& opts) {
  if (n < 1) throw std::invalid_argument("suite size must be >= 1");
  static constexpr double kLimitsMph[] = {20.0, 25.0, 30.0, 35.0, 40.0};
  static constexpr Template kTemplates[] = {Template::straight, Template::intersection_4way,
                                            Template::uturn_split, Template::merge,
                                            Template::parking_adjacent};
  Rng rng(seed);
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    GenSpec spec;
    spec.layout = kTemplates[rng.index(5)];
    std::vector<Behavior> options = supported_behaviors(spec.layout);
    if (opts.legal_only) std::erase_if(options, [](Behavior b) { return !is_legal(b); });
    spec.agent_behavior = options[rng.index(options.size())];
    spec.speed_limit_mps = kLimitsMph[rng.index(5)] * kMetersPerSecondPerMph;
    spec.seed = rng.next();
    spec.agent_id_base = static_cast<AgentId>(i) * 100;
    spec.background_agents = opts.background_agents;
    Scenario s = generate(spec);
    char id[64];
    std::snprintf(id, sizeof(id), "suite%llu-%05d-", static_cast<unsigned long long>(seed), i);
    s.scenario_id = id + std::string(to_string(spec.layout)) + "-" +
                    std::string(to_string(spec.agent_behavior));
    out.push_back(std::move(s));
  }
  return out;
}

VectorMap make_grid_network(int blocks, double block_length, double speed_limit_mps) {
  if (blocks < 1 || !(block_length > 20.0)) throw std::invalid_argument("grid too small");
  constexpr double kHalfBox = 6.0;
  // Travel directions: east, north, west, south.
  const Vec2 dirs[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  MapBuilder mb(speed_limit_mps);
  SegmentId next_id = 1;

  // inbound[(i, j)][d]: lane arriving at intersection (i, j) travelling in d.
  struct Ends {
    SegmentId in[4] = {0, 0, 0, 0};
    SegmentId out[4] = {0, 0, 0, 0};
  };
  std::map<std::pair<int, int>, Ends> ends;
  auto center = [&](int i, int j) { return Vec2{i * block_length, j * block_length}; };

  for (int i = 0; i <= blocks; ++i) {
    for (int j = 0; j <= blocks; ++j) {
      for (int d = 0; d < 2; ++d) {  // east and north pieces leaving (i, j)
        const int ni = i + (d == 0 ? 1 : 0);
        const int nj = j + (d == 1 ? 1 : 0);
        if (ni > blocks || nj > blocks) continue;
        for (int dir : {d, d + 2}) {
          const Vec2 u = dirs[dir];
          const Vec2 right{u.y, -u.x};
          const bool forward = dir == d;
          const Vec2 from_c = forward ? center(i, j) : center(ni, nj);
          const Vec2 to_c = forward ? center(ni, nj) : center(i, j);
          const Vec2 a = from_c + kHalfBox * u + kHalfLane * right;
          const Vec2 b = to_c - kHalfBox * u + kHalfLane * right;
          const SegmentId id = mb.add(next_id++, sample_line(a, b));
          const auto from_key = forward ? std::pair{i, j} : std::pair{ni, nj};
          const auto to_key = forward ? std::pair{ni, nj} : std::pair{i, j};
          ends[from_key].out[dir] = id;
          ends[to_key].in[dir] = id;
        }
      }
    }
  }
  for (const auto& [key, e] : ends) {
    for (int din = 0; din < 4; ++din) {
      if (!e.in[din]) continue;
      for (int dout = 0; dout < 4; ++dout) {
        if (!e.out[dout] || dout == (din + 2) % 4) continue;
        const Vec2 a = mb.segment(e.in[din]).nodes.back().position;
        const Vec2 b = mb.segment(e.out[dout]).nodes.front().position;
        const SegmentId c = mb.add(next_id++, sample_line(a, b));
        mb.link(e.in[din], c);
        mb.link(c, e.out[dout]);
      }
    }
  }
  return mb.build();
}

}  // namespace intentforge
