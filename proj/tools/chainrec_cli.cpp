// chainrec command-line front end: analyze, close, exponents, shadow.

#include "chainrec/errors.hpp"
#include "chainrec/report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

using namespace chainrec;

namespace {

json parse_params(const std::string& text) {
  if (text.empty()) return json::object();
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorKind::config, "cli", "--params must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::config, "cli", std::string("--params is not valid JSON: ") + e.what());
  }
}

Vec parse_point(const std::string& text, const System& sys) {
  const std::vector<Vec> rows = parse_points_csv(text, "--start");
  if (rows.size() != 1 || rows.front().size() != sys.dim())
    throw Error(ErrorKind::config, "cli", "--start needs exactly " + std::to_string(sys.dim()) + " comma-separated coordinates");
  return rows.front();
}

void emit(const json& j, const std::string& out) {
  const std::string text = j.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text_file(out, text);
  }
}

void check_dims(const std::vector<Vec>& pts, const System& sys, const std::string& source) {
  for (const Vec& p : pts)
    if (p.size() != sys.dim())
      throw Error(ErrorKind::config, "csv", "expected " + std::to_string(sys.dim()) + " columns", source);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain-recurrence and hyperbolicity analysis of discrete dynamical systems"};
  app.require_subcommand(1);

  // analyze
  std::string config_path, out_path, dot_path, csv_path;
  std::optional<std::uint64_t> seed;
  auto* analyze = app.add_subcommand("analyze", "Run the analysis pipeline described by a JSON config");
  analyze->add_option("--config", config_path, "Run configuration (JSON)")->required();
  analyze->add_option("--out", out_path, "Report JSON path (default: config outputs.report, else stdout)");
  analyze->add_option("--dot", dot_path, "Condensation graph (DOT)");
  analyze->add_option("--csv", csv_path, "Periodic-orbit spectra (CSV)");
  analyze->add_option("--seed", seed, "Override the config seed");

  // shared system options
  std::string system_name, params_text, input_path, result_path;
  auto add_system = [&](CLI::App* sub) {
    sub->add_option("--system", system_name, "System name")->required();
    sub->add_option("--params", params_text, "System parameters as a JSON object");
    sub->add_option("--out", result_path, "Output JSON path (default stdout)");
  };

  double tol = 1e-10;
  int max_iter = 100;
  auto* close = app.add_subcommand("close", "Close a periodic pseudo-orbit (CSV, one point per row) to a periodic orbit");
  add_system(close);
  close->add_option("--input", input_path, "Pseudo-orbit CSV z_0..z_{tau-1}")->required();
  close->add_option("--tol", tol, "Residual tolerance");
  close->add_option("--max-iterations", max_iter, "Newton iteration cap");

  std::string start_text;
  std::size_t steps = 10000, burn_in = 0;
  auto* exps = app.add_subcommand("exponents", "QR estimate of the Lyapunov spectrum along an orbit");
  add_system(exps);
  exps->add_option("--start", start_text, "Start point, comma separated")->required();
  exps->add_option("-n,--steps", steps, "Number of accumulated steps");
  exps->add_option("--burn-in", burn_in, "Discarded alignment steps (n >= 10 * burn-in)");

  double delta = 1e-2;
  std::size_t budget = 256;
  auto* shadow = app.add_subcommand("shadow", "Search an orbit segment Hausdorff-close to a pseudo-orbit");
  add_system(shadow);
  shadow->add_option("--input", input_path, "Pseudo-orbit CSV z_0..z_n")->required();
  shadow->add_option("--delta", delta, "Hausdorff tolerance");
  shadow->add_option("--budget", budget, "Candidate budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*analyze) {
      RunConfig cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (!out_path.empty()) cfg.outputs.report = out_path;
      if (!dot_path.empty()) cfg.outputs.dot = dot_path;
      if (!csv_path.empty()) cfg.outputs.csv = csv_path;
      const AnalysisReport r = run_analyze(cfg);
      write_outputs(r, cfg.outputs);
      if (!cfg.outputs.report) std::cout << report_text(r);
      return 0;
    }

    const System sys = make_system(system_name, parse_params(params_text));
    if (*close) {
      std::vector<Vec> pts = parse_points_csv(read_text_file(input_path), input_path);
      check_dims(pts, sys, input_path);
      if (pts.size() > 1 && pts.back() == pts.front()) pts.pop_back();
      ClosingOptions opt;
      opt.tolerance = tol;
      opt.max_iterations = max_iter;
      const PseudoOrbit po = PseudoOrbit::periodic(sys, pts);
      json j = to_json(close_to_periodic(sys, po, opt));
      j["system"] = sys.name();
      j["pseudo_orbit"] = to_json(po);
      emit(j, result_path);
    } else if (*exps) {
      json j = to_json(lyapunov_qr(sys, parse_point(start_text, sys), steps, burn_in));
      j["system"] = sys.name();
      emit(j, result_path);
    } else if (*shadow) {
      const std::vector<Vec> pts = parse_points_csv(read_text_file(input_path), input_path);
      check_dims(pts, sys, input_path);
      const PseudoOrbit po(sys, pts);
      json j = to_json(weak_shadow_check(sys, po, delta, budget));
      j["system"] = sys.name();
      j["pseudo_orbit_epsilon"] = po.jump_bound();
      emit(j, result_path);
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
