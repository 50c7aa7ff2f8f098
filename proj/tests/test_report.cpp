#include "chainrec/errors.hpp"
#include "chainrec/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sys/wait.h>

using namespace chainrec;

namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / "chainrec_test_report";
  fs::create_directories(p);
  return p;
}

fs::path write_scratch(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHAINREC_CLI) + " " + args + " > /dev/null 2> " +
                          (scratch_dir() / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string last_stderr() { return read_text_file((scratch_dir() / "stderr.txt").string()); }

ErrorKind config_error_kind(const json& j) {
  try {
    (void)RunConfig::from_json(j);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("config was accepted: " << j.dump());
  return ErrorKind::internal;
}

RunConfig small_cat() {
  return RunConfig::from_json(json::parse(R"({"system": "cat_map", "grid": {"depth": 4}, "seed": 3})"));
}

/// Quasi-attractors recomputed from the embedded condensation edges.
std::vector<int> minimal_from_edges(const AnalysisReport& r) {
  std::set<int> has_out;
  for (const auto& [a, b] : r.condensation_edges) has_out.insert(a);
  std::vector<int> out;
  for (const ClassRow& c : r.classes)
    if (!has_out.count(c.id)) out.push_back(c.id);
  return out;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("config parsing and defaults") {
    const RunConfig c = small_cat();
    CHECK(c.system == "cat_map");
    CHECK(c.depth == 4);
    CHECK_FALSE(c.epsilon);
    CHECK(c.stages.classify);
    CHECK(RunConfig::from_json(c.to_json()) == c);

    const RunConfig e = RunConfig::from_json(
        json::parse(R"({"system": {"name": "identity", "params": {"d": 2}}, "grid": {"epsilon": 0.01}})"));
    CHECK(e.epsilon == 0.01);
    CHECK(e.params["d"] == 2);
    CHECK(RunConfig::from_json(e.to_json()) == e);
  }

  TEST_CASE("config validation") {
    for (const char* bad : {
             R"({"grid": {"depth": 4}})",
             R"({"system": "cat_map", "grid": {"depth": 0}})",
             R"({"system": "cat_map", "grid": {"epsilon": -1}})",
             R"({"system": "cat_map", "grid": {"samples_per_axis": 1}})",
             R"({"system": "cat_map", "colour": "blue"})",
             R"({"system": "cat_map", "stages": {"closing": false}})",
             R"({"system": "cat_map", "stages": {"exponents": false}})",
             R"({"system": "cat_map", "grid": {"depth": "eight"}})",
             R"([1, 2])"}) {
      CHECK(config_error_kind(json::parse(bad)) == ErrorKind::config);
    }
    try {
      (void)RunConfig::from_json(json::parse(R"({"system": "cat_map", "stages": {"closing": false}})"));
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("'classify' requires 'closing'") != std::string::npos);
    }
    // disabling the dependent stage as well is fine
    CHECK_NOTHROW(RunConfig::from_json(
        json::parse(R"({"system": "cat_map", "stages": {"closing": false, "exponents": false, "classify": false}})")));
  }

  TEST_CASE("exit-code table") {
    const std::string ok = write_scratch("ok.json", R"({"system": "cat_map", "grid": {"depth": 3}})").string();
    const std::string unknown = write_scratch("unknown.json", R"({"system": "nope"})").string();
    const std::string dep =
        write_scratch("dep.json", R"({"system": "cat_map", "stages": {"closing": false}})").string();
    const std::string broken = write_scratch("broken.json", "{ not json").string();
    const std::string budget = write_scratch(
        "budget.json", R"({"system": "cat_map", "grid": {"depth": 8}, "budget": {"max_boxes": 1000}})").string();
    const std::string degenerate = write_scratch("degenerate.csv", "0.1,0.1\n0.1,0.11\n").string();
    const std::string drift = write_scratch("far.csv", "0.2,0.4\n0.3,0.3\n").string();

    struct Row {
      std::string args;
      int code;
      std::string message;
    };
    const std::vector<Row> table{
        {"analyze --config " + ok, 0, ""},
        {"analyze --config " + unknown, 2, "unknown system"},
        {"analyze --config " + dep, 2, "requires 'closing'"},
        {"analyze --config " + broken, 2, ""},
        {"analyze --config /nonexistent/cfg.json", 2, "/nonexistent/cfg.json"},
        {"analyze --config " + budget, 4, ""},
        {"close --system identity --params '{\"d\": 2}' --input " + degenerate, 3, ""},
        {"close --system cat_map --input " + drift, 2, ""},
        {"exponents --system morse_gradient_t1 --start 0.1,0.1 -n 10 --burn-in 5", 2, ""},
        {"frobnicate", 2, ""},
    };
    for (const Row& row : table) {
      CAPTURE(row.args);
      CHECK(run_cli(row.args) == row.code);
      if (!row.message.empty()) CHECK(last_stderr().find(row.message) != std::string::npos);
    }
  }

  TEST_CASE("report round trip") {
    const AnalysisReport r = run_analyze(small_cat());
    const fs::path p = scratch_dir() / "roundtrip.json";
    export_report(r, p.string());
    const AnalysisReport back = read_report(p.string());
    CHECK(back == r);
    CHECK(back.schema_version == "1");
    CHECK_THROWS_AS(read_report((scratch_dir() / "missing.json").string()), Error);
  }

  TEST_CASE("empty report is valid JSON with empty arrays") {
    const AnalysisReport r;
    const json j = json::parse(report_text(r));
    CHECK(j["classes"].is_array());
    CHECK(j["classes"].empty());
    CHECK(j["condensation_edges"].empty());
    CHECK(j["periodic_orbits"].empty());
    CHECK(AnalysisReport::from_json(j) == r);
    CHECK(export_dot(r) == "digraph condensation {\n}\n");
  }

  TEST_CASE("DOT export") {
    const std::vector<std::pair<BoxId, BoxId>> edges{{0, 0}, {0, 1}, {1, 1}};
    const TransitionGraph g = TransitionGraph::from_edges(2, edges);
    const ChainDecomposition dec = chain_recurrence_classes(g);
    const std::string dot = export_dot(dec.order, dec.classes);
    CHECK(dot == "digraph condensation {\n  C0 [label=\"C0 (1)\"];\n  C1 [label=\"C1 (1)\"];\n  C0 -> C1;\n}\n");
    CHECK(export_dot(dec.order, dec.classes) == dot);

    const AnalysisReport cat = run_analyze(small_cat());
    REQUIRE(cat.classes.size() == 1);
    const std::string cd = export_dot(cat);
    CHECK(cd.find("->") == std::string::npos);
    CHECK(cd.find("C0 [label=\"C0 (256)\"]") != std::string::npos);
  }

  TEST_CASE("cat-map pipeline end to end") {
    const AnalysisReport r = run_analyze(small_cat());
    REQUIRE(r.classes.size() == 1);
    CHECK(r.classes[0].box_count == 256);
    CHECK(r.classes[0].quasi_attractor);
    CHECK(r.classes[0].classification == "saddle, index 1");
    CHECK(r.quasi_attractors == minimal_from_edges(r));
    REQUIRE_FALSE(r.periodic_orbits.empty());
    for (const OrbitRow& o : r.periodic_orbits) {
      CHECK(o.residual <= 1e-10);
      REQUIRE(o.exponents);
      CHECK(std::abs(o.exponents->back() - 0.9624236501) < 1e-9);
      CHECK(o.index == 1);
    }
    const std::string csv = export_spectra_csv(r);
    CHECK(csv.rfind("orbit_id,period,lambda_1,lambda_2,index\n", 0) == 0);
    const std::vector<Vec> rows = parse_points_csv(csv.substr(csv.find('\n') + 1));
    CHECK(rows.size() == r.periodic_orbits.size());
  }

  TEST_CASE("determinism for identical config and seed") {
    RunConfig c = small_cat();
    c.depth = 5;
    json a = run_analyze(c).to_json();
    json b = run_analyze(c).to_json();
    a.erase("timing");
    b.erase("timing");
    CHECK(a.dump() == b.dump());
  }

  TEST_CASE("stage toggles") {
    RunConfig c = RunConfig::from_json(json::parse(
        R"({"system": "cat_map", "grid": {"depth": 3},
            "stages": {"closing": false, "exponents": false, "classify": false, "filtration": false, "conley": false}})"));
    const AnalysisReport r = run_analyze(c);
    CHECK(r.periodic_orbits.empty());
    CHECK_FALSE(r.filtration);
    CHECK_FALSE(r.classes.at(0).lyapunov);
    CHECK_FALSE(r.classes.at(0).classification);
  }

  TEST_CASE("CSV point parsing") {
    CHECK(parse_points_csv("x,y\n0.1,0.2\n0.3,0.4\n").size() == 2);
    CHECK(parse_points_csv("0.1, 0.2\n\n0.3,0.4").size() == 2);
    CHECK_THROWS_AS(parse_points_csv("0.1,0.2\n0.3\n"), Error);
    CHECK_THROWS_AS(parse_points_csv("0.1,abc\n0.3,0.4\n0.5,x\n"), Error);
    CHECK_THROWS_AS(parse_points_csv(""), Error);
  }
}
