#include "intentforge/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "intentforge/io.hpp"
#include "intentforge/scenario_gen.hpp"

namespace intentforge {

namespace {

using nlohmann::json;

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Runs f(0..n-1) on up to `jobs` threads. The exception of the lowest failing
// index is rethrown so failures do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t parse_seed(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("invalid seed '" + std::string(s) + "'");
  }
  return v;
}

// Reads `key` from `obj` into `dst` if present, rejecting type mismatches.
template <class T>
void read_key(const json& obj, const char* key, T& dst, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
      if (it->is_number_unsigned() ? false : it->template get<std::int64_t>() < 0) {
        throw ConfigError(where + "." + key + " must not be negative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw ConfigError(where + "." + key + " must be a number");
    } else {
      if (!it->is_string()) throw ConfigError(where + "." + key + " must be a string");
    }
    dst = it->template get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError("unknown config key " + where + "." + it.key());
    }
  }
}

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<double> heading_deg, proximity, backwards_look;
  std::optional<double> time_budget, speed_offset;
  std::optional<int> k, max_iterations;
  std::optional<double> tolerance;
  std::optional<double> dynamic_weight, static_weight;
  std::optional<std::size_t> window;
  std::optional<std::string> deviation_mode;
  bool exclude_parked = false;
};

void add_seed_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Run seed (overrides INTENTFORGE_SEED and config)");
}

void add_pipeline_options(CLI::App* cmd, Overrides& o) {
  add_seed_options(cmd, o);
  cmd->add_option("--jobs", o.jobs, "Worker threads");
  cmd->add_option("--heading-threshold-deg", o.heading_deg, "Lane heading tolerance");
  cmd->add_option("--proximity-limit", o.proximity, "Max distance to a lane node (m)");
  cmd->add_option("--backwards-look", o.backwards_look, "Upstream branch search (m), 0 disables");
  cmd->add_option("--time-budget", o.time_budget, "Reachability horizon (s)");
  cmd->add_option("--speed-offset", o.speed_offset, "Added to every speed limit (m/s)");
  cmd->add_option("--k", o.k, "Intention points per agent");
  cmd->add_option("--max-iterations", o.max_iterations, "K-means iteration cap");
  cmd->add_option("--tolerance", o.tolerance, "K-means convergence tolerance (m)");
  cmd->add_option("--dynamic-weight", o.dynamic_weight, "Mixed-set weight of dynamic points");
  cmd->add_option("--static-weight", o.static_weight, "Mixed-set weight of static points");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = default_run_config();
  if (!o.config_path.empty()) {
    std::string text;
    try {
      text = read_file(o.config_path);
    } catch (const IoError& e) {
      throw ConfigError(e.what());
    }
    apply_config_json(cfg, text);
  }
  if (o.seed) cfg.kmeans.seed = *o.seed;
  if (o.jobs) cfg.jobs = *o.jobs;
  if (o.heading_deg) cfg.assoc.heading_threshold = *o.heading_deg * kDegToRad;
  if (o.proximity) cfg.assoc.proximity_limit = *o.proximity;
  if (o.backwards_look) cfg.assoc.backwards_look = *o.backwards_look;
  if (o.time_budget) cfg.graph.time_budget = *o.time_budget;
  if (o.speed_offset) cfg.graph.speed_offset = *o.speed_offset;
  if (o.k) cfg.kmeans.k = *o.k;
  if (o.max_iterations) cfg.kmeans.max_iterations = *o.max_iterations;
  if (o.tolerance) cfg.kmeans.tolerance = *o.tolerance;
  if (o.dynamic_weight) cfg.mix.dynamic_weight = *o.dynamic_weight;
  if (o.static_weight) cfg.mix.static_weight = *o.static_weight;
  if (o.window) cfg.analysis.window = *o.window;
  if (o.deviation_mode) {
    auto mode = parse_deviation_mode(*o.deviation_mode);
    if (!mode) throw ConfigError("unknown deviation mode '" + *o.deviation_mode + "'");
    cfg.analysis.deviation_mode = *mode;
  }
  if (o.exclude_parked) cfg.analysis.exclude_parked = true;
  cfg.validate();
  return cfg;
}

std::string csv_id(const std::string& id) {
  if (id.find_first_of(",\"\n") != std::string::npos) {
    throw ScenarioError(ErrorKind::schema, "scenario id '" + id + "' cannot be written to CSV");
  }
  return id;
}

std::vector<AgentId> sorted_predict_ids(const Scenario& s) {
  std::vector<AgentId> ids = s.tracks_to_predict;
  std::sort(ids.begin(), ids.end());
  return ids;
}

// segment_id,node_idx,x,y,arrival_time with -1 for unreachable nodes.
std::string roadgraph_csv(const RoadGraph& graph, const ReachabilitySet* r) {
  std::vector<double> arrival(graph.node_count(), -1.0);
  if (r) {
    for (const auto& e : r->entries) arrival[e.index] = e.arrival_time;
  }
  std::string csv = "segment_id,node_idx,x,y,arrival_time\n";
  for (std::size_t i = 0; i < graph.node_count(); ++i) {
    const NodeRef ref = graph.node(i);
    const Vec2 p = graph.position(i);
    csv += std::to_string(ref.segment) + "," + std::to_string(ref.index) + "," + format_fixed6(p.x) +
           "," + format_fixed6(p.y) + "," + format_fixed6(arrival[i]) + "\n";
  }
  return csv;
}

// ---- gen -------------------------------------------------------------------

struct GenArgs {
  std::string layout;
  std::string behavior = "follow_lane";
  double speed_limit = GenSpec{}.speed_limit_mps;
  int suite = 0;
  bool legal_only = false;
  bool no_background = false;
  std::string out_dir;
};

int cmd_gen(const GenArgs& a, const Overrides& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  std::vector<Scenario> scenes;
  if (a.suite > 0) {
    SuiteOptions opts;
    opts.legal_only = a.legal_only;
    opts.background_agents = !a.no_background;
    scenes = generate_suite(a.suite, cfg.kmeans.seed, opts);
  } else {
    if (a.layout.empty()) {
      err << "gen: --template is required unless --suite is given\n";
      return 2;
    }
    auto t = parse_template(a.layout);
    if (!t) {
      err << "gen: unknown template '" << a.layout << "'\n";
      return 2;
    }
    auto b = parse_behavior(a.behavior);
    if (!b) {
      err << "gen: unknown behavior '" << a.behavior << "'\n";
      return 2;
    }
    if (!is_supported(*t, *b)) {
      err << "gen: template " << a.layout << " does not support behavior " << a.behavior << "\n";
      return 2;
    }
    if (!(a.speed_limit > 0.0)) {
      err << "gen: --speed-limit-mps must be positive\n";
      return 2;
    }
    GenSpec spec;
    spec.layout = *t;
    spec.agent_behavior = *b;
    spec.seed = cfg.kmeans.seed;
    spec.speed_limit_mps = a.speed_limit;
    spec.background_agents = !a.no_background;
    scenes.push_back(generate(spec));
  }
  for (const auto& s : scenes) {
    write_file(std::filesystem::path(a.out_dir) / (s.scenario_id + ".json"), write_scenario(s));
  }
  out << "wrote " << scenes.size() << " scenario(s) to " << a.out_dir << "\n";
  return 0;
}

// ---- intents ---------------------------------------------------------------

struct IntentsArgs {
  std::string kind;
  std::vector<std::string> scenarios;
  std::string static_points;
  std::string dump_dir;
  std::string out_path;
};

struct AgentIntentRow {
  AgentId agent_id = 0;
  IntentKind kind = IntentKind::static_;
  bool fallback = false;
  std::vector<Vec2> points;
};

// Static sets per object class, clustered from the corpus (or a points file
// for vehicles).
std::map<ObjectClass, IntentionPointSet> static_sets(std::span<const Scenario> scenes,
                                                     const std::vector<Vec2>* vehicle_points,
                                                     const KMeansConfig& km) {
  std::map<ObjectClass, IntentionPointSet> out;
  for (auto c : {ObjectClass::vehicle, ObjectClass::pedestrian, ObjectClass::cyclist}) {
    const std::vector<Vec2> endpoints =
        (c == ObjectClass::vehicle && vehicle_points) ? *vehicle_points : collect_endpoints(scenes, c);
    if (!endpoints.empty()) out.emplace(c, static_intents(endpoints, c, km));
  }
  return out;
}

int cmd_intents(const IntentsArgs& a, const Overrides& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  const auto kind = parse_intent_kind(a.kind);
  if (!kind) {
    err << "intents: unknown kind '" << a.kind << "'\n";
    return 2;
  }
  const std::vector<Scenario> scenes = load_scenarios(a.scenarios);
  std::optional<std::vector<Vec2>> file_points;
  if (!a.static_points.empty()) file_points = read_points_csv(a.static_points);
  const auto statics = static_sets(scenes, file_points ? &*file_points : nullptr, cfg.kmeans);

  std::vector<std::vector<AgentIntentRow>> rows(scenes.size());
  std::vector<std::vector<AgentId>> skipped(scenes.size());
  parallel_for(scenes.size(), cfg.jobs, [&](std::size_t si) {
    const Scenario& s = scenes[si];
    std::optional<RoadGraph> graph;
    for (AgentId id : sorted_predict_ids(s)) {
      const AgentTrack& t = *s.find_track(id);
      auto stat = statics.find(t.object_class);
      AgentIntentRow row;
      row.agent_id = id;
      if (t.object_class == ObjectClass::vehicle && *kind != IntentKind::static_) {
        const AssociationResult assoc = associate(s.map, t, cfg.assoc);
        if (!assoc.fallback) {
          if (!graph) graph = build_graph(s.map, cfg.graph);
          const ReachabilitySet r = reach(*graph, assoc, cfg.graph);
          if (!a.dump_dir.empty()) {
            write_file(std::filesystem::path(a.dump_dir) /
                           (s.scenario_id + "_" + std::to_string(id) + ".csv"),
                       roadgraph_csv(*graph, &r));
          }
          IntentionPointSet dyn = dynamic_intents(r, t, cfg.kmeans);
          if (*kind == IntentKind::mixed) {
            if (stat == statics.end()) throw ScenarioError(ErrorKind::invariant, "no vehicle endpoints for static points");
            dyn = mixed_intents(dyn, stat->second, cfg.mix, cfg.kmeans);
          }
          row.kind = dyn.kind;
          row.points = std::move(dyn.points);
          rows[si].push_back(std::move(row));
          continue;
        }
        row.fallback = true;
      }
      if (stat == statics.end()) {
        if (t.object_class == ObjectClass::vehicle) {
          throw ScenarioError(ErrorKind::invariant, "no vehicle endpoints for static points");
        }
        skipped[si].push_back(id);
        continue;
      }
      row.kind = IntentKind::static_;
      row.points = stat->second.points;
      rows[si].push_back(std::move(row));
    }
  });

  std::string csv = "scenario_id,agent_id,kind,idx,x,y,fallback\n";
  std::size_t agents = 0;
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const std::string sid = csv_id(scenes[si].scenario_id);
    for (const auto& r : rows[si]) {
      ++agents;
      for (std::size_t i = 0; i < r.points.size(); ++i) {
        csv += sid + "," + std::to_string(r.agent_id) + "," + std::string(to_string(r.kind)) + "," +
               std::to_string(i) + "," + format_fixed6(r.points[i].x) + "," +
               format_fixed6(r.points[i].y) + "," + (r.fallback ? "1" : "0") + "\n";
      }
    }
    for (AgentId id : skipped[si]) {
      err << "intents: " << scenes[si].scenario_id << " agent " << id
          << " skipped, no endpoints of its class\n";
    }
  }
  write_file(a.out_path, csv);
  out << "wrote intention points for " << agents << " agent(s) to " << a.out_path << "\n";
  return 0;
}

// ---- analyze ---------------------------------------------------------------

struct AnalyzeArgs {
  std::vector<std::string> scenarios;
  std::vector<std::string> predictions;  // name=path
  std::string static_points;
  std::string mix_ratios = "1:1,3:1,5:1";
  std::string out_dir;
};

struct AgentAnalysis {
  AgentId agent_id = 0;
  bool missing_predictions = false;
  DeviationRecord record;
  double cov_static = 0.0, cov_dynamic = 0.0, cov_mixed = 0.0;
  std::vector<double> cov_ratio;
};

std::vector<std::pair<double, double>> parse_ratios(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    const std::string item = text.substr(start, end - start);
    const std::size_t colon = item.find(':');
    char* e1 = nullptr;
    char* e2 = nullptr;
    const std::string lhs = item.substr(0, colon);
    const std::string rhs = colon == std::string::npos ? "" : item.substr(colon + 1);
    const double d = std::strtod(lhs.c_str(), &e1);
    const double s = std::strtod(rhs.c_str(), &e2);
    if (colon == std::string::npos || lhs.empty() || rhs.empty() || *e1 || *e2 || !(d > 0.0) ||
        !(s > 0.0) || !std::isfinite(d) || !std::isfinite(s)) {
      throw ConfigError("bad mix ratio '" + item + "', expected dynamic:static");
    }
    out.emplace_back(d, s);
    start = end + 1;
  }
  return out;
}

int cmd_analyze(const AnalyzeArgs& a, const Overrides& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  const auto ratios = a.mix_ratios.empty() ? std::vector<std::pair<double, double>>{}
                                           : parse_ratios(a.mix_ratios);
  std::map<std::string, std::string> model_paths;
  for (const auto& p : a.predictions) {
    const auto eq = p.find('=');
    const std::string name = eq == std::string::npos ? "" : p.substr(0, eq);
    if (name.empty() || eq + 1 >= p.size() ||
        name.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
            std::string::npos) {
      err << "analyze: --predictions expects name=path, got '" << p << "'\n";
      return 2;
    }
    if (!model_paths.emplace(name, p.substr(eq + 1)).second) {
      err << "analyze: duplicate model name '" << name << "'\n";
      return 2;
    }
  }

  const std::vector<Scenario> scenes = load_scenarios(a.scenarios);
  std::vector<std::string> models;
  std::vector<PredictionTable> tables;
  for (const auto& [name, path] : model_paths) {
    models.push_back(name);
    tables.push_back(parse_predictions_csv(read_file(path)));
  }
  std::optional<std::vector<Vec2>> file_points;
  if (!a.static_points.empty()) file_points = read_points_csv(a.static_points);
  const std::vector<Vec2> endpoints =
      file_points ? *file_points : collect_endpoints(scenes, ObjectClass::vehicle);
  if (endpoints.empty()) throw ScenarioError(ErrorKind::invariant, "no vehicle endpoints for static points");
  const IntentionPointSet stat = static_intents(endpoints, ObjectClass::vehicle, cfg.kmeans);

  const FilterResult filtered = filter_dataset(scenes, cfg.assoc);
  std::vector<std::vector<const FilteredAgent*>> by_scene(scenes.size());
  for (const auto& f : filtered.agents) by_scene[f.scenario_index].push_back(&f);
  for (auto& v : by_scene) {
    std::sort(v.begin(), v.end(), [](auto* x, auto* y) { return x->agent_id < y->agent_id; });
  }

  std::vector<std::vector<AgentAnalysis>> results(scenes.size());
  parallel_for(scenes.size(), cfg.jobs, [&](std::size_t si) {
    if (by_scene[si].empty()) return;
    const Scenario& s = scenes[si];
    const RoadGraph graph = build_graph(s.map, cfg.graph);
    for (const FilteredAgent* f : by_scene[si]) {
      const AgentTrack& t = *s.find_track(f->agent_id);
      const ReachabilitySet r = reach(graph, f->association, cfg.graph);
      AgentAnalysis res;
      res.agent_id = f->agent_id;
      res.record.scenario_id = s.scenario_id;
      res.record.agent_id = f->agent_id;
      res.record.deviation = gt_deviation(t, r, graph, cfg.analysis.deviation_mode);
      res.record.parked = detect_parked(t);
      for (const auto& table : tables) {
        const PredictionSet* p = find_prediction(table, s.scenario_id, f->agent_id);
        if (!p) {
          res.missing_predictions = true;
          break;
        }
        res.record.min_fde_8s.push_back(min_fde(*p, t, Horizon::s8));
      }
      const Vec2 end = *gt_endpoint_agent_frame(t);
      const IntentionPointSet dyn = dynamic_intents(r, t, cfg.kmeans);
      res.cov_static = coverage(stat, end);
      res.cov_dynamic = coverage(dyn, end);
      res.cov_mixed = coverage(mixed_intents(dyn, stat, cfg.mix, cfg.kmeans), end);
      for (const auto& [dw, sw] : ratios) {
        if (dw == cfg.mix.dynamic_weight && sw == cfg.mix.static_weight) {
          res.cov_ratio.push_back(res.cov_mixed);
        } else {
          res.cov_ratio.push_back(coverage(mixed_intents(dyn, stat, MixConfig{dw, sw}, cfg.kmeans), end));
        }
      }
      results[si].push_back(std::move(res));
    }
  });

  std::vector<DeviationRecord> records;
  std::size_t missing = 0;
  std::string coverage_csv = "scenario_id,agent_id,static_m,dynamic_m,mixed_m\n";
  std::vector<double> ratio_sum(ratios.size(), 0.0);
  std::size_t covered = 0;
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    for (const auto& r : results[si]) {
      if (r.missing_predictions) {
        ++missing;
        err << "analyze: missing predictions for " << scenes[si].scenario_id << " agent "
            << r.agent_id << ", skipped\n";
      } else {
        records.push_back(r.record);
      }
      coverage_csv += csv_id(scenes[si].scenario_id) + "," + std::to_string(r.agent_id) + "," +
                      format_fixed6(r.cov_static) + "," + format_fixed6(r.cov_dynamic) + "," +
                      format_fixed6(r.cov_mixed) + "\n";
      for (std::size_t i = 0; i < ratios.size(); ++i) ratio_sum[i] += r.cov_ratio[i];
      ++covered;
    }
  }

  std::size_t usable = records.size();
  if (cfg.analysis.exclude_parked) {
    usable = static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                    [](const DeviationRecord& r) { return !r.parked; }));
  }
  if (cfg.analysis.window > usable) {
    err << "analyze: window " << cfg.analysis.window << " exceeds the " << usable
        << " analyzable record(s)\n";
    return 2;
  }
  const DeviationCurve curve =
      deviation_curve(records, models, cfg.analysis.window, cfg.analysis.exclude_parked);

  std::string curve_csv = "rank,deviation_m";
  for (const auto& m : models) curve_csv += ",minfde_" + m;
  curve_csv += "\n";
  for (const auto& row : curve.rows) {
    curve_csv += std::to_string(row.rank) + "," + format_fixed6(row.deviation);
    for (double v : row.smoothed_min_fde) curve_csv += "," + format_fixed6(v);
    curve_csv += "\n";
  }

  const FilterReport& rep = filtered.report;
  std::string report_csv = "category,count\n";
  report_csv += "total," + std::to_string(rep.total) + "\n";
  report_csv += "excluded_non_vehicle," + std::to_string(rep.excluded_non_vehicle) + "\n";
  report_csv += "excluded_no_dynamic," + std::to_string(rep.excluded_no_dynamic) + "\n";
  report_csv += "excluded_invalid_gt," + std::to_string(rep.excluded_invalid_gt) + "\n";
  report_csv += "remaining," + std::to_string(rep.remaining) + "\n";
  report_csv += "missing_predictions," + std::to_string(missing) + "\n";
  report_csv += "analyzed," + std::to_string(records.size()) + "\n";

  std::string ratio_csv = "ratio,agents,mean_coverage_m\n";
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    char label[64];
    std::snprintf(label, sizeof(label), "%g:%g", ratios[i].first, ratios[i].second);
    const double mean = covered ? ratio_sum[i] / static_cast<double>(covered) : 0.0;
    ratio_csv += std::string(label) + "," + std::to_string(covered) + "," + format_fixed6(mean) + "\n";
  }

  const std::filesystem::path dir(a.out_dir);
  write_file(dir / "deviation_curve.csv", curve_csv);
  write_file(dir / "filter_report.csv", report_csv);
  write_file(dir / "coverage.csv", coverage_csv);
  if (!ratios.empty()) write_file(dir / "mix_ratio_table.csv", ratio_csv);
  out << "analyzed " << records.size() << " agent(s); outputs in " << a.out_dir << "\n";
  return 0;
}

// ---- dump-roadgraph ----------------------------------------------------------

struct DumpArgs {
  std::string scenario;
  AgentId agent = 0;
  std::string out_path;
};

int cmd_dump(const DumpArgs& a, const Overrides& o, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve(o);
  const Scenario s = parse_scenario(read_file(a.scenario));
  const AgentTrack* t = s.find_track(a.agent);
  if (!t) {
    err << "dump-roadgraph: agent " << a.agent << " not in scenario " << s.scenario_id << "\n";
    return 1;
  }
  const RoadGraph graph = build_graph(s.map, cfg.graph);
  std::optional<ReachabilitySet> r;
  if (t->object_class == ObjectClass::vehicle) {
    const AssociationResult assoc = associate(s.map, *t, cfg.assoc);
    if (assoc.fallback) {
      err << "dump-roadgraph: agent " << a.agent << " has no lane association\n";
    } else {
      r = reach(graph, assoc, cfg.graph);
    }
  } else {
    err << "dump-roadgraph: agent " << a.agent << " is not a vehicle\n";
  }
  const std::string csv = roadgraph_csv(graph, r ? &*r : nullptr);
  write_file(a.out_path, csv);
  out << "wrote " << graph.node_count() << " node(s) to " << a.out_path << "\n";
  return 0;
}

}  // namespace

void RunConfig::validate() const {
  try {
    assoc.validate();
    graph.validate();
    kmeans.validate();
    mix.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (analysis.window < 1) throw ConfigError("window must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

RunConfig default_run_config() {
  RunConfig cfg;
  if (const char* env = std::getenv("INTENTFORGE_SEED"); env && *env) {
    try {
      cfg.kmeans.seed = parse_seed(env);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("INTENTFORGE_SEED: ") + e.what());
    }
  }
  return cfg;
}

void apply_config_json(RunConfig& cfg, std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, {"seed", "jobs", "assoc", "graph", "kmeans", "mix", "analysis"}, "config");
  read_key(root, "seed", cfg.kmeans.seed, "config");
  read_key(root, "jobs", cfg.jobs, "config");
  if (auto it = root.find("assoc"); it != root.end()) {
    check_keys(*it, {"heading_threshold_deg", "proximity_limit_m", "backwards_look_m"}, "assoc");
    double deg = cfg.assoc.heading_threshold / kDegToRad;
    read_key(*it, "heading_threshold_deg", deg, "assoc");
    if (it->contains("heading_threshold_deg")) cfg.assoc.heading_threshold = deg * kDegToRad;
    read_key(*it, "proximity_limit_m", cfg.assoc.proximity_limit, "assoc");
    read_key(*it, "backwards_look_m", cfg.assoc.backwards_look, "assoc");
  }
  if (auto it = root.find("graph"); it != root.end()) {
    check_keys(*it, {"time_budget_s", "speed_offset_mps"}, "graph");
    read_key(*it, "time_budget_s", cfg.graph.time_budget, "graph");
    read_key(*it, "speed_offset_mps", cfg.graph.speed_offset, "graph");
  }
  if (auto it = root.find("kmeans"); it != root.end()) {
    check_keys(*it, {"k", "max_iterations", "tolerance_m"}, "kmeans");
    read_key(*it, "k", cfg.kmeans.k, "kmeans");
    read_key(*it, "max_iterations", cfg.kmeans.max_iterations, "kmeans");
    read_key(*it, "tolerance_m", cfg.kmeans.tolerance, "kmeans");
  }
  if (auto it = root.find("mix"); it != root.end()) {
    check_keys(*it, {"dynamic_weight", "static_weight"}, "mix");
    read_key(*it, "dynamic_weight", cfg.mix.dynamic_weight, "mix");
    read_key(*it, "static_weight", cfg.mix.static_weight, "mix");
  }
  if (auto it = root.find("analysis"); it != root.end()) {
    check_keys(*it, {"window", "deviation_mode", "exclude_parked"}, "analysis");
    read_key(*it, "window", cfg.analysis.window, "analysis");
    std::string mode(to_string(cfg.analysis.deviation_mode));
    read_key(*it, "deviation_mode", mode, "analysis");
    auto parsed = parse_deviation_mode(mode);
    if (!parsed) throw ConfigError("unknown deviation mode '" + mode + "'");
    cfg.analysis.deviation_mode = *parsed;
    read_key(*it, "exclude_parked", cfg.analysis.exclude_parked, "analysis");
  }
  cfg.validate();
}

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic and static intention points for trajectory prediction", "intentforge"};
  app.require_subcommand(1);

  Overrides gen_o, int_o, ana_o, dump_o;

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Write synthetic scenario files");
  g->add_option("--template", gen.layout, "straight | intersection_4way | uturn_split | merge | parking_adjacent");
  g->add_option("--behavior", gen.behavior, "follow_lane | corner_cut | illegal_uturn | offroad_parking | lane_merge_violation");
  g->add_option("--speed-limit-mps", gen.speed_limit, "Lane speed limit");
  g->add_option("--suite", gen.suite, "Generate N randomized scenarios instead")->check(CLI::PositiveNumber);
  g->add_flag("--legal-only", gen.legal_only, "Suite primaries only follow lanes or cut corners");
  g->add_flag("--no-background", gen.no_background, "Primary agent only");
  g->add_option("-o,--out", gen.out_dir, "Output directory")->required();
  add_seed_options(g, gen_o);

  IntentsArgs in;
  auto* i = app.add_subcommand("intents", "Per-agent intention points as CSV");
  i->add_option("--kind", in.kind, "static | dynamic | mixed")->required();
  i->add_option("--scenarios", in.scenarios, "Scenario files or directories")->required();
  i->add_option("--static-points", in.static_points, "x,y CSV of vehicle endpoints (agent frame)");
  i->add_option("--dump-roadgraph", in.dump_dir, "Directory for per-agent reachability CSVs");
  i->add_option("-o,--out", in.out_path, "Output CSV")->required();
  add_pipeline_options(i, int_o);

  AnalyzeArgs an;
  auto* z = app.add_subcommand("analyze", "Deviation curve, filter report and coverage tables");
  z->add_option("--scenarios", an.scenarios, "Scenario files or directories")->required();
  z->add_option("--predictions", an.predictions, "name=path prediction CSV, repeatable");
  z->add_option("--static-points", an.static_points, "x,y CSV of vehicle endpoints (agent frame)");
  z->add_option("--mix-ratios", an.mix_ratios, "Comma-separated dynamic:static weights");
  z->add_option("--window", ana_o.window, "Moving-average window");
  z->add_option("--deviation-mode", ana_o.deviation_mode, "node | polyline");
  z->add_flag("--exclude-parked", ana_o.exclude_parked, "Drop parked agents from the curve");
  z->add_option("-o,--out", an.out_dir, "Output directory")->required();
  add_pipeline_options(z, ana_o);

  DumpArgs dump;
  auto* d = app.add_subcommand("dump-roadgraph", "Arrival time of every lane node for one agent");
  d->add_option("--scenario", dump.scenario, "Scenario file")->required();
  d->add_option("--agent", dump.agent, "Agent id")->required();
  d->add_option("-o,--out", dump.out_path, "Output CSV")->required();
  add_pipeline_options(d, dump_o);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (g->parsed()) return cmd_gen(gen, gen_o, out, err);
    if (i->parsed()) return cmd_intents(in, int_o, out, err);
    if (z->parsed()) return cmd_analyze(an, ana_o, out, err);
    if (d->parsed()) return cmd_dump(dump, dump_o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace intentforge
