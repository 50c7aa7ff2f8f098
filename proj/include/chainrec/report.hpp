#pragma once

#include "chainrec/chain_graph.hpp"
#include "chainrec/cocycle.hpp"
#include "chainrec/orbit_closing.hpp"
#include "chainrec/systems.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace chainrec {

using nlohmann::json;

struct StageToggles {
  bool classes = true;
  bool filtration = true;
  bool conley = true;
  bool closing = true;
  bool exponents = true;
  bool classify = true;
  friend bool operator==(const StageToggles&, const StageToggles&) = default;
};

struct OutputPaths {
  std::optional<std::string> report;
  std::optional<std::string> dot;
  std::optional<std::string> csv;
  friend bool operator==(const OutputPaths&, const OutputPaths&) = default;
};

struct RunConfig {
  std::string system;
  json params = json::object();
  int depth = 6;
  /// Empty means "one box diameter".
  std::optional<double> epsilon;
  int samples_per_axis = 3;
  std::optional<double> lipschitz;
  StageToggles stages;
  OutputPaths outputs;
  std::uint64_t seed = 0;
  std::uint64_t max_boxes = std::uint64_t{1} << 22;
  unsigned threads = 1;
  /// Periods tried when searching closing seeds inside a class.
  int max_period = 4;
  int orbits_per_class = 2;
  /// Class boxes scanned for closing seeds (sampled with `seed` beyond this).
  std::size_t seed_boxes = 4096;
  int n_max = 8;
  double zero_tolerance = 1e-3;
  double rate = kDefaultRate;

  /// Parses and validates (ranges and stage dependencies); throws Error(config).
  static RunConfig from_json(const json& j);
  json to_json() const;
  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig load_config(const std::string& path);

struct ClassRow {
  int id = 0;
  std::size_t box_count = 0;
  std::vector<BoxId> boxes;
  bool recurrent = true;
  bool quasi_attractor = false;
  std::optional<std::string> lyapunov;  // exact rational "p/q"
  std::optional<std::string> classification;
  friend bool operator==(const ClassRow&, const ClassRow&) = default;
};

struct OrbitRow {
  int id = 0;
  int class_id = 0;
  std::size_t period = 0;
  std::vector<std::vector<double>> points;
  double residual = 0.0;
  std::optional<std::vector<double>> exponents;
  std::optional<int> index;
  friend bool operator==(const OrbitRow&, const OrbitRow&) = default;
};

struct FiltrationSummary {
  std::vector<std::size_t> level_sizes;
  std::vector<int> selected;
  friend bool operator==(const FiltrationSummary&, const FiltrationSummary&) = default;
};

struct AnalysisReport {
  std::string schema_version = "1";
  json config = json::object();
  int depth = 0;
  std::uint64_t box_count = 0;
  double epsilon = 0.0;
  std::size_t edge_count = 0;
  bool rigorous = false;
  std::size_t recurrent_box_count = 0;
  /// Recurrent classes only (transient SCCs are summarized by count).
  std::vector<ClassRow> classes;
  std::size_t transient_class_count = 0;
  std::vector<std::pair<int, int>> condensation_edges;
  std::vector<int> quasi_attractors;
  std::optional<FiltrationSummary> filtration;
  std::vector<OrbitRow> periodic_orbits;
  /// Wall-clock milliseconds per stage; excluded from determinism checks.
  std::map<std::string, double> timing;

  json to_json() const;
  static AnalysisReport from_json(const json& j);
  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

/// Runs the enabled stages in dependency order.
AnalysisReport run_analyze(const RunConfig& cfg);

/// Writes the configured report/DOT/CSV files.
void write_outputs(const AnalysisReport& r, const OutputPaths& out);

std::string report_text(const AnalysisReport& r);
void export_report(const AnalysisReport& r, const std::string& path);
AnalysisReport read_report(const std::string& path);

/// Condensation of the recurrent classes as a DOT digraph.
std::string export_dot(const AnalysisReport& r);
std::string export_dot(const CondensationOrder& order, const std::vector<ChainClass>& classes);

/// One row per orbit: orbit_id, period, lambda_1..lambda_d, index.
std::string export_spectra_csv(const AnalysisReport& r);

// Serialization helpers shared with the CLI.
json to_json(const Vec& v);
Vec vec_from_json(const json& j);
json to_json(const PseudoOrbit& po);
json to_json(const PeriodicOrbit& o);
json to_json(const PeriodicCocycle& c);
json to_json(const LyapunovSpectrum& s);
json to_json(const ShadowReport& r);

/// Point rows from CSV text; a non-numeric first row is taken as a header.
std::vector<Vec> parse_points_csv(const std::string& text, const std::string& source = "csv");
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace chainrec
