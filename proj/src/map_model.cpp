#include "intentforge/map_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace intentforge {

namespace {

// Tolerance for values that went through the 6-decimal file format.
constexpr double kFormatSlack = 1e-6;

[[noreturn]] void invariant_error(const std::string& what) {
  throw ScenarioError(ErrorKind::invariant, "invariant violation: " + what);
}

[[noreturn]] void schema_error(const std::string& field, const std::string& reason) {
  throw ScenarioError(ErrorKind::schema, "schema violation: " + field + ": " + reason);
}

bool finite(Vec2 v) { return std::isfinite(v.x) && std::isfinite(v.y); }

}  // namespace

std::string format_fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double quantize(double v) { return std::strtod(format_fixed6(v).c_str(), nullptr); }

LaneSegment make_segment(SegmentId id, std::span<const Vec2> positions,
                         double speed_limit) {
  LaneSegment seg;
  seg.id = id;
  seg.speed_limit = speed_limit;
  seg.nodes.reserve(positions.size());
  double arc = 0.0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (i > 0) arc += distance(positions[i - 1], positions[i]);
    seg.nodes.push_back({positions[i], arc});
  }
  return seg;
}

double point_to_polyline_distance(Vec2 p, std::span<const LaneNode> nodes) {
  std::vector<Vec2> pts;
  pts.reserve(nodes.size());
  for (const auto& n : nodes) pts.push_back(n.position);
  return point_to_polyline_distance(p, std::span<const Vec2>(pts));
}

// ---------------------------------------------------------------------------
// VectorMap

VectorMap::VectorMap(std::vector<LaneSegment> segments) : segments_(std::move(segments)) {
  std::sort(segments_.begin(), segments_.end(),
            [](const LaneSegment& a, const LaneSegment& b) { return a.id < b.id; });
  for (auto& s : segments_) {
    std::sort(s.exit_ids.begin(), s.exit_ids.end());
    std::sort(s.entry_ids.begin(), s.entry_ids.end());
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (!by_id_.emplace(segments_[i].id, i).second) {
      invariant_error("duplicate segment id " + std::to_string(segments_[i].id));
    }
  }
  validate();
  build_index();
}

void VectorMap::validate() const {
  for (const auto& s : segments_) {
    const std::string name = "segment " + std::to_string(s.id);
    if (s.nodes.size() < 2) invariant_error(name + " has fewer than 2 nodes");
    if (!(s.speed_limit > 0.0) || !std::isfinite(s.speed_limit)) {
      invariant_error(name + " speed limit must be positive");
    }
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      if (!finite(s.nodes[i].position)) invariant_error(name + " has a non-finite node");
      if (i == 0) continue;
      const double gap = distance(s.nodes[i - 1].position, s.nodes[i].position);
      if (!(gap > 0.0) || gap > kMaxNodeSpacing + kFormatSlack) {
        invariant_error(name + " node spacing " + format_fixed6(gap) + " at index " +
                        std::to_string(i) + " outside (0, 2.0]");
      }
      if (!(s.nodes[i].arc_offset > s.nodes[i - 1].arc_offset)) {
        invariant_error(name + " arc offsets not strictly increasing");
      }
    }
    auto check_links = [&](const std::vector<SegmentId>& ids, bool exits) {
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0 && ids[i] == ids[i - 1]) {
          invariant_error(name + " lists segment " + std::to_string(ids[i]) + " twice");
        }
        const LaneSegment* other = find(ids[i]);
        if (!other) {
          invariant_error(name + " references missing segment " + std::to_string(ids[i]));
        }
        const auto& back = exits ? other->entry_ids : other->exit_ids;
        if (!std::binary_search(back.begin(), back.end(), s.id)) {
          invariant_error("asymmetric connectivity between segments " +
                          std::to_string(s.id) + " and " + std::to_string(ids[i]) +
                          ": segment " + std::to_string(s.id) + " lists " +
                          (exits ? "exit " : "entry ") + std::to_string(ids[i]) +
                          " but segment " + std::to_string(ids[i]) + " lacks " +
                          (exits ? "entry " : "exit ") + std::to_string(s.id));
        }
      }
    };
    check_links(s.exit_ids, true);
    check_links(s.entry_ids, false);
    auto check_neighbor = [&](const std::optional<NeighborRef>& n, bool left) {
      if (!n) return;
      const char* side = left ? "left" : "right";
      if (n->id == s.id) invariant_error(name + " is its own " + side + " neighbor");
      const LaneSegment* other = find(n->id);
      if (!other) {
        invariant_error(name + " " + side + " neighbor " + std::to_string(n->id) +
                        " does not exist");
      }
      const auto& back = left ? other->right : other->left;
      if (!back || back->id != s.id) {
        invariant_error("neighbor references of segments " + std::to_string(s.id) +
                        " and " + std::to_string(n->id) + " are not mutual");
      }
    };
    check_neighbor(s.left, true);
    check_neighbor(s.right, false);
  }
}

void VectorMap::build_index() {
  offsets_.clear();
  std::size_t total = 0;
  for (const auto& s : segments_) {
    offsets_.push_back(total);
    total += s.nodes.size();
  }
  flat_positions_x_.reserve(total);
  flat_positions_y_.reserve(total);
  flat_segment_.reserve(total);
  for (std::size_t si = 0; si < segments_.size(); ++si) {
    for (const auto& n : segments_[si].nodes) {
      const auto flat = static_cast<std::uint32_t>(flat_positions_x_.size());
      flat_positions_x_.push_back(n.position.x);
      flat_positions_y_.push_back(n.position.y);
      flat_segment_.push_back(si);
      grid_[cell_of(n.position)].push_back(flat);
    }
  }
}

VectorMap::CellKey VectorMap::cell_of(Vec2 p) const {
  return {static_cast<std::int64_t>(std::floor(p.x / kCellSize)),
          static_cast<std::int64_t>(std::floor(p.y / kCellSize))};
}

const LaneSegment* VectorMap::find(SegmentId id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &segments_[it->second];
}

const LaneSegment& VectorMap::segment(SegmentId id) const {
  const LaneSegment* s = find(id);
  if (!s) throw std::out_of_range("no segment with id " + std::to_string(id));
  return *s;
}

std::size_t VectorMap::segment_offset(SegmentId id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw std::out_of_range("no segment with id " + std::to_string(id));
  return offsets_[it->second];
}

std::size_t VectorMap::flat_index(NodeRef ref) const {
  auto it = by_id_.find(ref.segment);
  if (it == by_id_.end() || ref.index >= segments_[it->second].nodes.size()) {
    throw std::out_of_range("invalid node reference");
  }
  return offsets_[it->second] + ref.index;
}

NodeRef VectorMap::node_ref(std::size_t flat) const {
  const std::size_t si = flat_segment_.at(flat);
  return {segments_[si].id, static_cast<std::uint32_t>(flat - offsets_[si])};
}

Vec2 VectorMap::position(NodeRef ref) const { return position(flat_index(ref)); }

std::vector<NodeHit> VectorMap::nearest_lane_nodes(Vec2 p, double radius) const {
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  std::vector<NodeHit> hits;
  auto consider = [&](std::size_t flat) {
    const double d = distance(p, position(flat));
    if (d <= radius) hits.push_back({node_ref(flat), d});
  };

  const double span_x = std::floor((p.x + radius) / kCellSize) - std::floor((p.x - radius) / kCellSize) + 1;
  const double span_y = std::floor((p.y + radius) / kCellSize) - std::floor((p.y - radius) / kCellSize) + 1;
  if (!std::isfinite(span_x * span_y) ||
      span_x * span_y > static_cast<double>(grid_.size())) {
    for (std::size_t i = 0; i < node_count(); ++i) consider(i);
  } else {
    const CellKey lo = cell_of({p.x - radius, p.y - radius});
    const CellKey hi = cell_of({p.x + radius, p.y + radius});
    for (std::int64_t cx = lo.cx; cx <= hi.cx; ++cx) {
      for (std::int64_t cy = lo.cy; cy <= hi.cy; ++cy) {
        auto it = grid_.find({cx, cy});
        if (it == grid_.end()) continue;
        for (auto flat : it->second) consider(flat);
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const NodeHit& a, const NodeHit& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.node < b.node;
  });
  return hits;
}

// ---------------------------------------------------------------------------
// Agents

std::string_view to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::vehicle:
      return "vehicle";
    case ObjectClass::pedestrian:
      return "pedestrian";
    case ObjectClass::cyclist:
      return "cyclist";
  }
  return "vehicle";
}

std::optional<ObjectClass> parse_object_class(std::string_view s) {
  if (s == "vehicle") return ObjectClass::vehicle;
  if (s == "pedestrian") return ObjectClass::pedestrian;
  if (s == "cyclist") return ObjectClass::cyclist;
  return std::nullopt;
}

const AgentTrack* Scenario::find_track(AgentId id) const {
  for (const auto& t : tracks) {
    if (t.agent_id == id) return &t;
  }
  return nullptr;
}

namespace {

void validate_tracks(const Scenario& s) {
  std::unordered_set<AgentId> ids;
  for (const auto& t : s.tracks) {
    const std::string name = "track " + std::to_string(t.agent_id);
    if (!ids.insert(t.agent_id).second) invariant_error("duplicate agent id " + std::to_string(t.agent_id));
    if (t.history.size() != static_cast<std::size_t>(kHistorySteps)) {
      invariant_error(name + " history must have " + std::to_string(kHistorySteps) + " states");
    }
    if (t.future.size() != static_cast<std::size_t>(kFutureSteps)) {
      invariant_error(name + " future must have " + std::to_string(kFutureSteps) + " states");
    }
    if (!t.current().valid) invariant_error(name + " current state is not valid");
    if (!(t.length >= 0.0) || !(t.width >= 0.0)) invariant_error(name + " has negative dimensions");
    auto check_state = [&](const AgentState& st) {
      if (!st.valid) return;
      if (!finite(st.position) || !std::isfinite(st.speed)) {
        invariant_error(name + " has a non-finite valid state");
      }
      if (st.heading <= -std::numbers::pi - kFormatSlack ||
          st.heading > std::numbers::pi + kFormatSlack) {
        invariant_error(name + " heading outside (-pi, pi]");
      }
    };
    for (const auto& st : t.history) check_state(st);
    for (const auto& st : t.future) check_state(st);
  }
  for (AgentId id : s.tracks_to_predict) {
    if (!ids.count(id)) {
      invariant_error("tracks_to_predict references missing agent " + std::to_string(id));
    }
  }
}

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(path + "." + key, "missing");
  return *it;
}

double get_number(const json& v, const std::string& path) {
  if (!v.is_number()) schema_error(path, "expected number");
  return v.get<double>();
}

std::int64_t get_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) schema_error(path, "expected integer");
  return v.get<std::int64_t>();
}

std::vector<SegmentId> get_id_list(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected array");
  std::vector<SegmentId> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(get_integer(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::optional<NeighborRef> get_neighbor(const json& v, const std::string& path) {
  if (v.is_null()) return std::nullopt;
  if (!v.is_object()) schema_error(path, "expected object or null");
  NeighborRef n;
  n.id = get_integer(require(v, "id", path), path + ".id");
  const json& ok = require(v, "change_ok", path);
  if (!ok.is_boolean()) schema_error(path + ".change_ok", "expected boolean");
  n.change_ok = ok.get<bool>();
  return n;
}

std::vector<AgentState> get_states(const json& v, const std::string& path) {
  if (!v.is_array()) schema_error(path, "expected array");
  std::vector<AgentState> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    const json& row = v[i];
    if (!row.is_array() || row.size() != 6) {
      schema_error(p, "expected [t, x, y, heading, speed, valid]");
    }
    AgentState st;
    st.timestamp_index = static_cast<int>(get_integer(row[0], p + "[0]"));
    st.position = {get_number(row[1], p + "[1]"), get_number(row[2], p + "[2]")};
    st.heading = get_number(row[3], p + "[3]");
    st.speed = get_number(row[4], p + "[4]");
    if (row[5].is_boolean()) {
      st.valid = row[5].get<bool>();
    } else if (row[5].is_number_integer() && (row[5] == 0 || row[5] == 1)) {
      st.valid = row[5].get<int>() == 1;
    } else {
      schema_error(p + "[5]", "expected 0/1 validity flag");
    }
    out.push_back(st);
  }
  return out;
}

void append_states(std::string& out, const std::vector<AgentState>& states) {
  out += '[';
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& st = states[i];
    if (i) out += ',';
    out += '[' + std::to_string(st.timestamp_index) + ',' + format_fixed6(st.position.x) +
           ',' + format_fixed6(st.position.y) + ',' + format_fixed6(st.heading) + ',' +
           format_fixed6(st.speed) + ',' + (st.valid ? "1" : "0") + ']';
  }
  out += ']';
}

void append_ids(std::string& out, const std::vector<std::int64_t>& ids) {
  out += '[';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  out += ']';
}

void append_neighbor(std::string& out, const std::optional<NeighborRef>& n) {
  if (!n) {
    out += "null";
    return;
  }
  out += std::string("{\"change_ok\":") + (n->change_ok ? "true" : "false") +
         ",\"id\":" + std::to_string(n->id) + '}';
}

}  // namespace

void validate(const Scenario& s) { validate_tracks(s); }

Scenario parse_scenario(std::string_view bytes) {
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ScenarioError(ErrorKind::syntax, std::string("malformed syntax: ") + e.what());
  }
  if (!doc.is_object()) schema_error("<root>", "expected object");

  Scenario s;
  const json& sid = require(doc, "scenario_id", "<root>");
  if (!sid.is_string()) schema_error("scenario_id", "expected string");
  s.scenario_id = sid.get<std::string>();

  const json& map = require(doc, "map", "<root>");
  if (!map.is_object()) schema_error("map", "expected object");
  const json& segs = require(map, "segments", "map");
  if (!segs.is_array()) schema_error("map.segments", "expected array");
  std::vector<LaneSegment> segments;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string p = "map.segments[" + std::to_string(i) + "]";
    const json& js = segs[i];
    if (!js.is_object()) schema_error(p, "expected object");
    const SegmentId id = get_integer(require(js, "id", p), p + ".id");
    const double limit = get_number(require(js, "speed_limit_mps", p), p + ".speed_limit_mps");
    if (!(limit > 0.0)) schema_error(p + ".speed_limit_mps", "must be positive");
    const json& jn = require(js, "nodes", p);
    if (!jn.is_array()) schema_error(p + ".nodes", "expected array");
    std::vector<Vec2> pos;
    for (std::size_t k = 0; k < jn.size(); ++k) {
      const std::string pk = p + ".nodes[" + std::to_string(k) + "]";
      if (!jn[k].is_array() || jn[k].size() != 2) schema_error(pk, "expected [x, y]");
      pos.push_back({get_number(jn[k][0], pk + "[0]"), get_number(jn[k][1], pk + "[1]")});
    }
    if (pos.size() < 2) schema_error(p + ".nodes", "need at least 2 nodes");
    LaneSegment seg = make_segment(id, pos, limit);
    seg.exit_ids = get_id_list(require(js, "exits", p), p + ".exits");
    seg.entry_ids = get_id_list(require(js, "entries", p), p + ".entries");
    seg.left = get_neighbor(require(js, "left", p), p + ".left");
    seg.right = get_neighbor(require(js, "right", p), p + ".right");
    segments.push_back(std::move(seg));
  }
  s.map = VectorMap(std::move(segments));

  const json& tracks = require(doc, "tracks", "<root>");
  if (!tracks.is_array()) schema_error("tracks", "expected array");
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const std::string p = "tracks[" + std::to_string(i) + "]";
    const json& jt = tracks[i];
    if (!jt.is_object()) schema_error(p, "expected object");
    AgentTrack t;
    t.agent_id = get_integer(require(jt, "agent_id", p), p + ".agent_id");
    const json& cls = require(jt, "class", p);
    if (!cls.is_string()) schema_error(p + ".class", "expected string");
    auto oc = parse_object_class(cls.get<std::string>());
    if (!oc) schema_error(p + ".class", "must be vehicle, pedestrian or cyclist");
    t.object_class = *oc;
    t.length = get_number(require(jt, "length_m", p), p + ".length_m");
    t.width = get_number(require(jt, "width_m", p), p + ".width_m");
    t.history = get_states(require(jt, "history", p), p + ".history");
    t.future = get_states(require(jt, "future", p), p + ".future");
    s.tracks.push_back(std::move(t));
  }

  const json& ttp = require(doc, "tracks_to_predict", "<root>");
  s.tracks_to_predict = get_id_list(ttp, "tracks_to_predict");

  validate_tracks(s);
  return s;
}

std::string write_scenario(const Scenario& s) {
  std::string out;
  out += "{\"map\":{\"segments\":[";
  const auto& segs = s.map.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const auto& seg = segs[i];
    out += i ? ",\n" : "\n";
    out += "{\"entries\":";
    append_ids(out, seg.entry_ids);
    out += ",\"exits\":";
    append_ids(out, seg.exit_ids);
    out += ",\"id\":" + std::to_string(seg.id) + ",\"left\":";
    append_neighbor(out, seg.left);
    out += ",\"nodes\":[";
    for (std::size_t k = 0; k < seg.nodes.size(); ++k) {
      if (k) out += ',';
      out += '[' + format_fixed6(seg.nodes[k].position.x) + ',' +
             format_fixed6(seg.nodes[k].position.y) + ']';
    }
    out += "],\"right\":";
    append_neighbor(out, seg.right);
    out += ",\"speed_limit_mps\":" + format_fixed6(seg.speed_limit) + '}';
  }
  out += "]},\n\"scenario_id\":" + nlohmann::json(s.scenario_id).dump() + ",\n\"tracks\":[";
  for (std::size_t i = 0; i < s.tracks.size(); ++i) {
    const auto& t = s.tracks[i];
    out += i ? ",\n" : "\n";
    out += "{\"agent_id\":" + std::to_string(t.agent_id) + ",\"class\":\"" +
           std::string(to_string(t.object_class)) + "\",\"future\":";
    append_states(out, t.future);
    out += ",\"history\":";
    append_states(out, t.history);
    out += ",\"length_m\":" + format_fixed6(t.length) + ",\"width_m\":" + format_fixed6(t.width) + '}';
  }
  out += "],\n\"tracks_to_predict\":";
  append_ids(out, s.tracks_to_predict);
  out += "}\n";
  return out;
}

}  // namespace intentforge
