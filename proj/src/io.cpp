#include "intentforge/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace intentforge {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw ScenarioError(ErrorKind::schema, "line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    schema_error(line, "bad number '" + std::string(s) + "'");
  }
  return v;
}

std::int64_t to_int(std::string_view s, std::size_t line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    schema_error(line, "bad integer '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw IoError("cannot write " + path.string());
}

std::vector<Scenario> load_scenarios(std::span<const std::string> paths) {
  std::vector<std::filesystem::path> files;
  for (const auto& p : paths) {
    const std::filesystem::path path(p);
    if (std::filesystem::is_directory(path)) {
      for (const auto& entry : std::filesystem::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
          files.push_back(entry.path());
        }
      }
    } else {
      files.push_back(path);
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Scenario> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    try {
      out.push_back(parse_scenario(read_file(f)));
    } catch (const ScenarioError& e) {
      throw ScenarioError(e.kind(), f.string() + ": " + e.what());
    }
  }
  std::sort(out.begin(), out.end(),
            [](const Scenario& a, const Scenario& b) { return a.scenario_id < b.scenario_id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].scenario_id == out[i - 1].scenario_id) {
      throw ScenarioError(ErrorKind::invariant, "duplicate scenario id " + out[i].scenario_id);
    }
  }
  return out;
}

std::vector<Vec2> read_points_csv(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] != "x,y") schema_error(1, "expected header 'x,y'");
  std::vector<Vec2> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = split(lines[i], ',');
    if (cols.size() != 2) schema_error(i + 1, "expected 2 columns");
    out.push_back({to_double(cols[0], i + 1), to_double(cols[1], i + 1)});
  }
  return out;
}

std::string points_csv(std::span<const Vec2> points) {
  std::string out = "x,y\n";
  for (Vec2 p : points) out += format_fixed6(p.x) + "," + format_fixed6(p.y) + "\n";
  return out;
}

PredictionTable parse_predictions_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty()) schema_error(1, "missing header");
  const bool with_scenario = lines[0] == "scenario_id,agent_id,mode_idx,confidence,step,x,y";
  if (!with_scenario && lines[0] != "agent_id,mode_idx,confidence,step,x,y") {
    schema_error(1, "unexpected header '" + std::string(lines[0]) + "'");
  }
  const std::size_t offset = with_scenario ? 1 : 0;
  PredictionTable table;
  std::map<PredictionKey, std::vector<std::vector<char>>> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t ln = i + 1;
    const auto cols = split(lines[i], ',');
    if (cols.size() != 6 + offset) schema_error(ln, "wrong column count");
    PredictionKey key{with_scenario ? std::string(cols[0]) : std::string(), to_int(cols[offset], ln)};
    const auto mode = to_int(cols[offset + 1], ln);
    const double conf = to_double(cols[offset + 2], ln);
    const auto step = to_int(cols[offset + 3], ln);
    if (mode < 0 || mode >= 6) schema_error(ln, "mode index outside [0, 6)");
    if (step < 0 || step >= kFutureSteps) schema_error(ln, "step outside the future horizon");
    auto& set = table[key];
    auto& marks = seen[key];
    set.agent_id = key.second;
    if (set.modes.size() <= static_cast<std::size_t>(mode)) {
      set.modes.resize(mode + 1);
      marks.resize(mode + 1);
    }
    auto& m = set.modes[mode];
    if (m.points.empty()) {
      m.points.resize(kFutureSteps);
      marks[mode].assign(kFutureSteps, 0);
      m.confidence = conf;
    } else if (m.confidence != conf) {
      schema_error(ln, "confidence changes within a mode");
    }
    if (marks[mode][step]) schema_error(ln, "duplicate step");
    marks[mode][step] = 1;
    m.points[step] = {to_double(cols[offset + 4], ln), to_double(cols[offset + 5], ln)};
  }
  for (const auto& [key, marks] : seen) {
    for (const auto& m : marks) {
      if (std::count(m.begin(), m.end(), 1) != kFutureSteps) {
        throw ScenarioError(ErrorKind::schema,
                            "agent " + std::to_string(key.second) + ": incomplete or missing mode");
      }
    }
    try {
      table.at(key).validate();
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(ErrorKind::invariant, "agent " + std::to_string(key.second) + ": " + e.what());
    }
  }
  return table;
}

std::string predictions_csv(std::span<const std::pair<std::string, PredictionSet>> sets) {
  std::string out = "scenario_id,agent_id,mode_idx,confidence,step,x,y\n";
  for (const auto& [sid, set] : sets) {
    for (std::size_t m = 0; m < set.modes.size(); ++m) {
      const auto& mode = set.modes[m];
      for (std::size_t s = 0; s < mode.points.size(); ++s) {
        out += sid + "," + std::to_string(set.agent_id) + "," + std::to_string(m) + "," +
               format_fixed6(mode.confidence) + "," + std::to_string(s) + "," +
               format_fixed6(mode.points[s].x) + "," + format_fixed6(mode.points[s].y) + "\n";
      }
    }
  }
  return out;
}

const PredictionSet* find_prediction(const PredictionTable& table, const std::string& scenario_id,
                                     AgentId agent_id) {
  if (auto it = table.find({scenario_id, agent_id}); it != table.end()) return &it->second;
  if (auto it = table.find({std::string(), agent_id}); it != table.end()) return &it->second;
  return nullptr;
}

}  // namespace intentforge
