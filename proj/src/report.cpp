#include "chainrec/report.hpp"

#include "chainrec/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace chainrec {

namespace {

constexpr const char* kConfig = "config";
constexpr const char* kReport = "report";

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::config, kConfig, "expected an object", where);
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw Error(ErrorKind::config, kConfig, "unknown key '" + key + "'", where);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::config, kConfig, std::string("bad value for '") + key + "'", where);
  }
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw Error(ErrorKind::config, kConfig, std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

json opt_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

bool in_class(const BoxGrid& grid, const BoxSet& boxes, const Vec& p) {
  std::vector<BoxId> touching;
  grid.boxes_meeting(grid.ambient().canonicalize(p), Vec::Zero(grid.dim()), touching);
  return std::any_of(touching.begin(), touching.end(), [&](BoxId b) { return boxes.contains(b); });
}

struct SeedCandidate {
  double residual;
  int period;
  BoxId box;
  int which;  // 0 = lower corner, 1 = center
  friend bool operator<(const SeedCandidate& a, const SeedCandidate& b) {
    return std::tie(a.residual, a.period, a.box, a.which) < std::tie(b.residual, b.period, b.box, b.which);
  }
};

/// Periodic orbits inside one recurrent class: seeds with the smallest return
/// residual are closed by Newton; exact cycles are kept even when degenerate.
std::vector<PeriodicOrbit> find_class_orbits(const System& sys, const BoxGrid& grid, const ChainClass& cls,
                                             const RunConfig& cfg) {
  std::vector<BoxId> boxes = cls.boxes.ids();
  if (boxes.size() > cfg.seed_boxes) {
    std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(cls.id + 1)));
    std::shuffle(boxes.begin(), boxes.end(), rng);
    boxes.resize(cfg.seed_boxes);
    std::sort(boxes.begin(), boxes.end());
  }

  std::vector<SeedCandidate> cands;
  for (BoxId b : boxes) {
    for (int which = 0; which < 2; ++which) {
      const Vec start = which == 0 ? grid.lower_corner(b) : grid.center(b);
      Vec x = start;
      for (int q = 1; q <= cfg.max_period; ++q) {
        x = sys.step(x);
        cands.push_back({sys.ambient().distance(x, start), q, b, which});
      }
    }
  }
  std::sort(cands.begin(), cands.end());

  std::vector<PeriodicOrbit> found;
  const std::size_t attempts = 8 * static_cast<std::size_t>(cfg.orbits_per_class);
  for (std::size_t k = 0; k < cands.size() && k < attempts; ++k) {
    if (found.size() >= static_cast<std::size_t>(cfg.orbits_per_class)) break;
    const SeedCandidate& c = cands[k];
    std::vector<Vec> cycle{c.which == 0 ? grid.lower_corner(c.box) : grid.center(c.box)};
    for (int i = 1; i < c.period; ++i) cycle.push_back(sys.step(cycle.back()));

    std::optional<PeriodicOrbit> orbit;
    try {
      orbit = close_to_periodic(sys, PseudoOrbit::periodic(sys, cycle));
    } catch (const DegeneracyError&) {
      if (periodic_residual(sys, cycle) <= 1e-12) {
        cycle = reduce_to_minimal_period(sys.ambient(), std::move(cycle), 1e-9);
        PeriodicOrbit exact;
        exact.period = cycle.size();
        exact.residual = periodic_residual(sys, cycle);
        exact.points = std::move(cycle);
        orbit = std::move(exact);
      }
    } catch (const Error&) {
      // not closeable from this seed (divergence or ambiguous lift)
    }
    if (!orbit) continue;
    if (!std::all_of(orbit->points.begin(), orbit->points.end(),
                     [&](const Vec& p) { return in_class(grid, cls.boxes, p); }))
      continue;
    const bool duplicate = std::any_of(found.begin(), found.end(), [&](const PeriodicOrbit& o) {
      return o.period == orbit->period && hausdorff_distance(sys.ambient(), o.points, orbit->points) < 1e-8;
    });
    if (!duplicate) found.push_back(std::move(*orbit));
  }
  std::sort(found.begin(), found.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
    if (a.period != b.period) return a.period < b.period;
    return std::lexicographical_compare(a.points.front().begin(), a.points.front().end(),
                                        b.points.front().begin(), b.points.front().end());
  });
  return found;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

// ---------------------------------------------------------------------------
// RunConfig

RunConfig RunConfig::from_json(const json& j) {
  check_keys(j, {"system", "grid", "stages", "outputs", "seed", "budget", "closing", "classify"}, "root");
  RunConfig c;

  if (!j.contains("system")) throw Error(ErrorKind::config, kConfig, "missing 'system'");
  const json& sys = j.at("system");
  if (sys.is_string()) {
    c.system = sys.get<std::string>();
  } else {
    check_keys(sys, {"name", "params"}, "system");
    c.system = get_or<std::string>(sys, "name", "", "system");
    if (sys.contains("params")) {
      if (!sys.at("params").is_object()) throw Error(ErrorKind::config, kConfig, "params must be an object", "system");
      c.params = sys.at("params");
    }
  }
  if (c.system.empty()) throw Error(ErrorKind::config, kConfig, "system name is empty");

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"depth", "epsilon", "samples_per_axis", "lipschitz"}, "grid");
    c.depth = get_or<int>(g, "depth", c.depth, "grid");
    if (g.contains("epsilon") && !g.at("epsilon").is_null()) {
      const json& e = g.at("epsilon");
      if (e.is_string()) {
        if (e.get<std::string>() != "box_diameter")
          throw Error(ErrorKind::config, kConfig, "epsilon must be a number or \"box_diameter\"", "grid");
      } else if (e.is_number()) {
        c.epsilon = e.get<double>();
      } else {
        throw Error(ErrorKind::config, kConfig, "epsilon must be a number or \"box_diameter\"", "grid");
      }
    }
    c.samples_per_axis = get_or<int>(g, "samples_per_axis", c.samples_per_axis, "grid");
    if (g.contains("lipschitz") && !g.at("lipschitz").is_null()) c.lipschitz = get_or<double>(g, "lipschitz", 0.0, "grid");
  }

  if (j.contains("stages")) {
    const json& s = j.at("stages");
    check_keys(s, {"classes", "filtration", "conley", "closing", "exponents", "classify"}, "stages");
    c.stages.classes = get_or<bool>(s, "classes", true, "stages");
    c.stages.filtration = get_or<bool>(s, "filtration", true, "stages");
    c.stages.conley = get_or<bool>(s, "conley", true, "stages");
    c.stages.closing = get_or<bool>(s, "closing", true, "stages");
    c.stages.exponents = get_or<bool>(s, "exponents", true, "stages");
    c.stages.classify = get_or<bool>(s, "classify", true, "stages");
  }

  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    check_keys(o, {"report", "dot", "csv"}, "outputs");
    c.outputs.report = opt_string(o, "report");
    c.outputs.dot = opt_string(o, "dot");
    c.outputs.csv = opt_string(o, "csv");
  }

  c.seed = get_or<std::uint64_t>(j, "seed", 0, "root");

  if (j.contains("budget")) {
    const json& b = j.at("budget");
    check_keys(b, {"max_boxes", "threads"}, "budget");
    c.max_boxes = get_or<std::uint64_t>(b, "max_boxes", c.max_boxes, "budget");
    c.threads = get_or<unsigned>(b, "threads", c.threads, "budget");
  }
  if (j.contains("closing")) {
    const json& b = j.at("closing");
    check_keys(b, {"max_period", "orbits_per_class", "seed_boxes"}, "closing");
    c.max_period = get_or<int>(b, "max_period", c.max_period, "closing");
    c.orbits_per_class = get_or<int>(b, "orbits_per_class", c.orbits_per_class, "closing");
    c.seed_boxes = get_or<std::size_t>(b, "seed_boxes", c.seed_boxes, "closing");
  }
  if (j.contains("classify")) {
    const json& b = j.at("classify");
    check_keys(b, {"n_max", "zero_tolerance", "rate"}, "classify");
    c.n_max = get_or<int>(b, "n_max", c.n_max, "classify");
    c.zero_tolerance = get_or<double>(b, "zero_tolerance", c.zero_tolerance, "classify");
    c.rate = get_or<double>(b, "rate", c.rate, "classify");
  }

  if (c.depth < 1) throw Error(ErrorKind::config, kConfig, "depth must be >= 1", "grid");
  if (c.epsilon && !(*c.epsilon >= 0.0)) throw Error(ErrorKind::config, kConfig, "epsilon must be >= 0", "grid");
  if (c.samples_per_axis < 2) throw Error(ErrorKind::config, kConfig, "samples_per_axis must be >= 2", "grid");
  if (c.lipschitz && !(*c.lipschitz >= 0.0)) throw Error(ErrorKind::config, kConfig, "lipschitz must be >= 0", "grid");
  if (c.threads < 1) throw Error(ErrorKind::config, kConfig, "threads must be >= 1", "budget");
  if (c.max_period < 1 || c.orbits_per_class < 1 || c.seed_boxes < 1)
    throw Error(ErrorKind::config, kConfig, "closing limits must be >= 1", "closing");
  if (c.n_max < 1 || !(c.zero_tolerance > 0.0) || !(c.rate > 1.0))
    throw Error(ErrorKind::config, kConfig, "need n_max >= 1, zero_tolerance > 0, rate > 1", "classify");

  const auto need = [](bool on, bool dep, const char* stage, const char* dep_name) {
    if (on && !dep)
      throw Error(ErrorKind::config, kConfig,
                  std::string("stage '") + stage + "' requires '" + dep_name + "' to be enabled", "stages");
  };
  const StageToggles& s = c.stages;
  need(s.filtration, s.classes, "filtration", "classes");
  need(s.conley, s.classes, "conley", "classes");
  need(s.closing, s.classes, "closing", "classes");
  need(s.classify, s.closing, "classify", "closing");
  need(s.classify, s.exponents, "classify", "exponents");
  need(s.exponents, s.closing, "exponents", "closing");
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["system"] = {{"name", system}, {"params", params}};
  j["grid"] = {{"depth", depth},
               {"epsilon", epsilon ? json(*epsilon) : json("box_diameter")},
               {"samples_per_axis", samples_per_axis},
               {"lipschitz", lipschitz ? json(*lipschitz) : json(nullptr)}};
  j["stages"] = {{"classes", stages.classes},     {"filtration", stages.filtration},
                 {"conley", stages.conley},       {"closing", stages.closing},
                 {"exponents", stages.exponents}, {"classify", stages.classify}};
  j["outputs"] = {{"report", opt_json(outputs.report)}, {"dot", opt_json(outputs.dot)}, {"csv", opt_json(outputs.csv)}};
  j["seed"] = seed;
  j["budget"] = {{"max_boxes", max_boxes}, {"threads", threads}};
  j["closing"] = {{"max_period", max_period}, {"orbits_per_class", orbits_per_class}, {"seed_boxes", seed_boxes}};
  j["classify"] = {{"n_max", n_max}, {"zero_tolerance", zero_tolerance}, {"rate", rate}};
  return j;
}

RunConfig load_config(const std::string& path) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, kConfig, std::string("invalid JSON: ") + e.what(), path);
  }
  return RunConfig::from_json(j);
}

// ---------------------------------------------------------------------------
// AnalysisReport

json AnalysisReport::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["config"] = config;
  j["grid"] = {{"depth", depth},
               {"box_count", box_count},
               {"epsilon", epsilon},
               {"edge_count", edge_count},
               {"rigorous", rigorous}};
  j["recurrent_box_count"] = recurrent_box_count;
  j["transient_class_count"] = transient_class_count;
  json cls = json::array();
  for (const ClassRow& r : classes) {
    cls.push_back({{"id", r.id},
                   {"box_count", r.box_count},
                   {"boxes", r.boxes},
                   {"recurrent", r.recurrent},
                   {"quasi_attractor", r.quasi_attractor},
                   {"lyapunov", opt_json(r.lyapunov)},
                   {"classification", opt_json(r.classification)}});
  }
  j["classes"] = std::move(cls);
  json edges = json::array();
  for (const auto& [a, b] : condensation_edges) edges.push_back({a, b});
  j["condensation_edges"] = std::move(edges);
  j["quasi_attractors"] = quasi_attractors;
  j["filtration"] = filtration ? json{{"level_sizes", filtration->level_sizes}, {"selected", filtration->selected}}
                               : json(nullptr);
  json orbits = json::array();
  for (const OrbitRow& o : periodic_orbits) {
    orbits.push_back({{"id", o.id},
                      {"class_id", o.class_id},
                      {"period", o.period},
                      {"points", o.points},
                      {"residual", o.residual},
                      {"exponents", o.exponents ? json(*o.exponents) : json(nullptr)},
                      {"index", o.index ? json(*o.index) : json(nullptr)}});
  }
  j["periodic_orbits"] = std::move(orbits);
  j["timing"] = timing;
  return j;
}

AnalysisReport AnalysisReport::from_json(const json& j) {
  try {
    AnalysisReport r;
    r.schema_version = j.at("schema_version").get<std::string>();
    if (r.schema_version != "1") throw Error(ErrorKind::config, kReport, "unsupported schema version " + r.schema_version);
    r.config = j.at("config");
    const json& g = j.at("grid");
    r.depth = g.at("depth").get<int>();
    r.box_count = g.at("box_count").get<std::uint64_t>();
    r.epsilon = g.at("epsilon").get<double>();
    r.edge_count = g.at("edge_count").get<std::size_t>();
    r.rigorous = g.at("rigorous").get<bool>();
    r.recurrent_box_count = j.at("recurrent_box_count").get<std::size_t>();
    r.transient_class_count = j.at("transient_class_count").get<std::size_t>();
    for (const json& c : j.at("classes")) {
      ClassRow row;
      row.id = c.at("id").get<int>();
      row.box_count = c.at("box_count").get<std::size_t>();
      row.boxes = c.at("boxes").get<std::vector<BoxId>>();
      row.recurrent = c.at("recurrent").get<bool>();
      row.quasi_attractor = c.at("quasi_attractor").get<bool>();
      if (!c.at("lyapunov").is_null()) row.lyapunov = c.at("lyapunov").get<std::string>();
      if (!c.at("classification").is_null()) row.classification = c.at("classification").get<std::string>();
      r.classes.push_back(std::move(row));
    }
    for (const json& e : j.at("condensation_edges")) r.condensation_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    r.quasi_attractors = j.at("quasi_attractors").get<std::vector<int>>();
    if (!j.at("filtration").is_null()) {
      FiltrationSummary f;
      f.level_sizes = j.at("filtration").at("level_sizes").get<std::vector<std::size_t>>();
      f.selected = j.at("filtration").at("selected").get<std::vector<int>>();
      r.filtration = std::move(f);
    }
    for (const json& o : j.at("periodic_orbits")) {
      OrbitRow row;
      row.id = o.at("id").get<int>();
      row.class_id = o.at("class_id").get<int>();
      row.period = o.at("period").get<std::size_t>();
      row.points = o.at("points").get<std::vector<std::vector<double>>>();
      row.residual = o.at("residual").get<double>();
      if (!o.at("exponents").is_null()) row.exponents = o.at("exponents").get<std::vector<double>>();
      if (!o.at("index").is_null()) row.index = o.at("index").get<int>();
      r.periodic_orbits.push_back(std::move(row));
    }
    r.timing = j.at("timing").get<std::map<std::string, double>>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, kReport, std::string("malformed report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Pipeline

AnalysisReport run_analyze(const RunConfig& cfg) {
  AnalysisReport r;
  r.config = cfg.to_json();
  // output locations are not analysis inputs; keep them out of the echo
  r.config.erase("outputs");
  auto t0 = Clock::now();

  const System sys = make_system(cfg.system, cfg.params);
  BoxGrid grid = [&] {
    // Count cells before allocating anything.
    const BoxGrid g(sys.ambient(), cfg.depth);
    if (g.box_count() > cfg.max_boxes)
      throw Error(ErrorKind::budget, "grid",
                  "box count " + std::to_string(g.box_count()) + " exceeds max_boxes " + std::to_string(cfg.max_boxes));
    return g;
  }();
  r.depth = grid.depth();
  r.box_count = grid.box_count();
  r.epsilon = cfg.epsilon.value_or(grid.box_diameter());
  r.timing["setup"] = elapsed_ms(t0);

  t0 = Clock::now();
  GraphOptions gopt;
  gopt.epsilon = r.epsilon;
  gopt.samples_per_axis = cfg.samples_per_axis;
  gopt.lipschitz = cfg.lipschitz;
  gopt.threads = cfg.threads;
  const TransitionGraph g = build_transition_graph(sys, grid, gopt);
  r.edge_count = g.edge_count();
  r.rigorous = g.rigorous();
  r.timing["graph"] = elapsed_ms(t0);

  if (!cfg.stages.classes) return r;

  t0 = Clock::now();
  const ChainDecomposition dec = chain_recurrence_classes(g);
  const std::vector<QuasiAttractor> qa = quasi_attractors(dec, g);
  r.recurrent_box_count = dec.recurrent_boxes().size();
  r.transient_class_count = dec.classes.size() - dec.recurrent_count();
  r.condensation_edges = dec.order.edges();
  for (const QuasiAttractor& q : qa) r.quasi_attractors.push_back(q.class_id);
  std::sort(r.quasi_attractors.begin(), r.quasi_attractors.end());
  for (int id : dec.order.recurrent_ids()) {
    const ChainClass& c = dec.at(id);
    ClassRow row;
    row.id = id;
    row.box_count = c.boxes.size();
    row.boxes = c.boxes.ids();
    row.recurrent = c.recurrent;
    row.quasi_attractor = std::binary_search(r.quasi_attractors.begin(), r.quasi_attractors.end(), id);
    r.classes.push_back(std::move(row));
  }
  r.timing["classes"] = elapsed_ms(t0);

  if (cfg.stages.filtration) {
    t0 = Clock::now();
    const std::vector<int>& sel = dec.order.recurrent_ids();
    const Filtration f = build_filtration(dec, g, sel);
    FiltrationSummary s;
    for (const BoxSet& level : f.levels) s.level_sizes.push_back(level.size());
    s.selected = f.selected;
    r.filtration = std::move(s);
    r.timing["filtration"] = elapsed_ms(t0);
  }

  if (cfg.stages.conley) {
    t0 = Clock::now();
    const CompleteLyapunovFunction h = conley_function(dec, g);
    for (ClassRow& row : r.classes) row.lyapunov = h.class_value[static_cast<std::size_t>(row.id)].str();
    r.timing["conley"] = elapsed_ms(t0);
  }

  if (!cfg.stages.closing) return r;

  t0 = Clock::now();
  std::vector<std::vector<PeriodicOrbit>> orbits_of(r.classes.size());
  for (std::size_t k = 0; k < r.classes.size(); ++k) {
    orbits_of[k] = find_class_orbits(sys, grid, dec.at(r.classes[k].id), cfg);
    for (const PeriodicOrbit& o : orbits_of[k]) {
      OrbitRow row;
      row.id = static_cast<int>(r.periodic_orbits.size());
      row.class_id = r.classes[k].id;
      row.period = o.period;
      for (const Vec& p : o.points) row.points.push_back(to_std(p));
      row.residual = o.residual;
      r.periodic_orbits.push_back(std::move(row));
    }
  }
  r.timing["closing"] = elapsed_ms(t0);

  if (cfg.stages.exponents) {
    t0 = Clock::now();
    std::size_t next = 0;
    for (const auto& list : orbits_of) {
      for (const PeriodicOrbit& o : list) {
        OrbitRow& row = r.periodic_orbits[next++];
        const LyapunovSpectrum s = exponents_periodic(cocycle_from_orbit(sys, o));
        row.exponents = s.exponents;
        row.index = static_cast<int>(std::count_if(s.exponents.begin(), s.exponents.end(), [](double l) { return l < 0; }));
      }
    }
    r.timing["exponents"] = elapsed_ms(t0);
  }

  if (cfg.stages.classify) {
    t0 = Clock::now();
    ClassifyOptions opt;
    opt.n_max = cfg.n_max;
    opt.zero_tolerance = cfg.zero_tolerance;
    opt.rate = cfg.rate;
    for (std::size_t k = 0; k < r.classes.size(); ++k)
      r.classes[k].classification = classify_class(sys, dec.at(r.classes[k].id), orbits_of[k], opt).verdict;
    r.timing["classify"] = elapsed_ms(t0);
  }
  return r;
}

void write_outputs(const AnalysisReport& r, const OutputPaths& out) {
  if (out.report) export_report(r, *out.report);
  if (out.dot) write_text_file(*out.dot, export_dot(r));
  if (out.csv) write_text_file(*out.csv, export_spectra_csv(r));
}

std::string report_text(const AnalysisReport& r) { return r.to_json().dump(2) + "\n"; }

void export_report(const AnalysisReport& r, const std::string& path) { write_text_file(path, report_text(r)); }

AnalysisReport read_report(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return AnalysisReport::from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, kReport, std::string("invalid JSON: ") + e.what(), path);
  }
}

// ---------------------------------------------------------------------------
// DOT / CSV

namespace {

std::string dot_text(const std::vector<std::pair<int, std::size_t>>& nodes, std::vector<std::pair<int, int>> edges) {
  std::sort(edges.begin(), edges.end());
  std::ostringstream os;
  os << "digraph condensation {\n";
  for (const auto& [id, count] : nodes) os << "  C" << id << " [label=\"C" << id << " (" << count << ")\"];\n";
  for (const auto& [a, b] : edges) os << "  C" << a << " -> C" << b << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace

std::string export_dot(const AnalysisReport& r) {
  std::vector<std::pair<int, std::size_t>> nodes;
  for (const ClassRow& c : r.classes) nodes.emplace_back(c.id, c.box_count);
  std::sort(nodes.begin(), nodes.end());
  return dot_text(nodes, r.condensation_edges);
}

std::string export_dot(const CondensationOrder& order, const std::vector<ChainClass>& classes) {
  std::vector<std::pair<int, std::size_t>> nodes;
  for (int id : order.recurrent_ids()) {
    const auto it = std::find_if(classes.begin(), classes.end(), [&](const ChainClass& c) { return c.id == id; });
    if (it == classes.end()) throw Error(ErrorKind::internal, kReport, "class missing from table", std::to_string(id));
    nodes.emplace_back(id, it->boxes.size());
  }
  std::sort(nodes.begin(), nodes.end());
  return dot_text(nodes, order.edges());
}

std::string export_spectra_csv(const AnalysisReport& r) {
  std::size_t d = 0;
  for (const OrbitRow& o : r.periodic_orbits)
    if (!o.points.empty()) d = std::max(d, o.points.front().size());
  std::ostringstream os;
  os.precision(17);
  os << "orbit_id,period";
  for (std::size_t i = 1; i <= d; ++i) os << ",lambda_" << i;
  os << ",index\n";
  for (const OrbitRow& o : r.periodic_orbits) {
    os << o.id << "," << o.period;
    for (std::size_t i = 0; i < d; ++i) {
      os << ",";
      if (o.exponents && i < o.exponents->size()) os << (*o.exponents)[i];
    }
    os << ",";
    if (o.index) os << *o.index;
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Serialization helpers

json to_json(const Vec& v) { return to_std(v); }

Vec vec_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::config, kReport, "point must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::config, kReport, "point coordinates must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json to_json(const PseudoOrbit& po) {
  json pts = json::array();
  for (const Vec& p : po.points()) pts.push_back(to_json(p));
  return {{"points", pts}, {"epsilon", po.jump_bound()}, {"periodic", po.is_periodic()}, {"length", po.length()}};
}

json to_json(const PeriodicOrbit& o) {
  json pts = json::array();
  for (const Vec& p : o.points) pts.push_back(to_json(p));
  return {{"points", pts},
          {"period", o.period},
          {"residual", o.residual},
          {"iterations", o.iterations},
          {"hausdorff_to_pseudo", o.hausdorff_to_pseudo ? json(*o.hausdorff_to_pseudo) : json(nullptr)}};
}

json to_json(const PeriodicCocycle& c) {
  json mats = json::array();
  for (const Mat& m : c.matrices()) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_std(m.row(i).transpose()));
    mats.push_back(std::move(rows));
  }
  return {{"period", c.period()}, {"bound", c.bound()}, {"matrices", mats}};
}

json to_json(const LyapunovSpectrum& s) {
  json j = {{"exponents", s.exponents},
            {"source", s.source == SpectrumSource::exact_periodic ? "exact-periodic" : "qr-estimate"},
            {"iterations", s.iterations}};
  if (s.source == SpectrumSource::qr_estimate) j["drift"] = s.drift;
  return j;
}

json to_json(const ShadowReport& r) {
  auto seg = [](const std::optional<OrbitSegment>& s) -> json {
    if (!s) return nullptr;
    json pts = json::array();
    for (const Vec& p : s->points) pts.push_back(to_json(p));
    return {{"start", to_json(s->start)},
            {"steps", s->steps},
            {"hausdorff", s->hausdorff},
            {"defect", s->defect},
            {"origin", s->origin},
            {"points", pts}};
  };
  return {{"found", r.found},
          {"delta", r.delta},
          {"candidates_tried", r.candidates_tried},
          {"message", r.message},
          {"witness", seg(r.witness)},
          {"best", seg(r.best)}};
}

std::vector<Vec> parse_points_csv(const std::string& text, const std::string& source) {
  std::vector<Vec> pts;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    bool numeric = true;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      field = b == std::string::npos ? "" : field.substr(b, e - b + 1);
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (field.empty() || end != field.c_str() + field.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (pts.empty() && dim < 0) {
        dim = 0;  // header consumed
        continue;
      }
      throw Error(ErrorKind::config, "csv", "non-numeric field", source + ":" + std::to_string(line_no));
    }
    const auto n = static_cast<Eigen::Index>(row.size());
    if (!pts.empty() && n != pts.front().size())
      throw Error(ErrorKind::config, "csv", "inconsistent column count", source + ":" + std::to_string(line_no));
    pts.push_back(Eigen::Map<const Vec>(row.data(), n));
  }
  if (pts.empty()) throw Error(ErrorKind::config, "csv", "no points", source);
  return pts;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "io", "cannot open file for reading", path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "io", "cannot open file for writing", path);
  out << text;
  if (!out) throw Error(ErrorKind::io, "io", "write failed", path);
}

}  // namespace chainrec
