// Command-line front end: solve a problem spec, compute Pade poles, and
// re-check stored results.
//
// Exit codes: 0 success, 1 input error, 2 numerical failure, 3 check failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "mincap/pipeline.hpp"
#include "mincap/svg.hpp"

namespace {

using namespace mincap;

enum exit_code { ok = 0, bad_input = 1, numerical = 2, check_failed = 3 };

void write_failure(const std::string& path, const io::json& problem, const numerical_error& e) {
  io::json j = {{"schemaVersion", io::schema_version},
                {"status", "failed"},
                {"problem", problem},
                {"error", {{"message", e.what()}, {"where", io::point(e.where())}, {"residual", io::number(e.residual())}}}};
  io::write_file(path, j);
}

int cmd_solve(const std::string& spec_path, const std::string& out, const std::string& svg, double tol, bool timings) {
  io::problem_spec spec;
  try {
    spec = io::read_problem(io::parse_file(spec_path));
    if (tol > 0.0) spec.solver.tolerance = tol;
  } catch (const std::invalid_argument& e) {
    std::cerr << "mincap solve: " << e.what() << '\n';
    return bad_input;
  }
  try {
    const auto r = run_solve(spec, {timings});
    io::write_file(out, io::to_json(r));
    if (!svg.empty()) {
      svg_options o;
      if (r.pade)
        for (const auto& p : r.pade->poles) o.poles.push_back(p.point);
      std::ofstream(svg) << render_svg(r.set, o);
    }
    std::cout << "topology " << r.topology << "  capacity " << r.capacity.value << "  checks "
              << (r.checks_passed() ? "pass" : "FAIL") << '\n';
    return ok;
  } catch (const numerical_error& e) {
    std::cerr << "mincap solve: numerical failure: " << e.what() << '\n';
    write_failure(out, spec.source, e);
    return numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "mincap solve: " << e.what() << '\n';
    return bad_input;
  }
}

int cmd_pade(const std::string& spec_path, int n, unsigned digits, const std::string& out, const std::string& result,
             const std::string& svg) {
  try {
    const auto spec = io::read_problem(io::parse_file(spec_path));
    if (!spec.function) throw input_error("the pade command needs a \"function\" in the spec");
    if (n < 0) n = spec.pade_n;
    if (n < 0) throw input_error("no approximant size: pass -n or set pade.n in the spec");
    if (!digits) digits = spec.pade_digits ? spec.pade_digits : default_pade_digits(n);
    const int order = io::value_or(spec.source.value("pade", io::json::object()), "seriesOrder", 2 * n + 2);
    if (order < 2 * n + 2)
      throw input_error("pade: series order " + std::to_string(order) + " is insufficient for n = " + std::to_string(n));
    std::optional<io::result_file> prior;
    if (!result.empty()) prior = io::read_result(io::parse_file(result));
    const auto section = run_pade(*spec.function, n, digits, prior ? &prior->set : nullptr, spec.pade_epsilon_fraction,
                                  spec.polar_singularities);
    io::write_file(out, {{"schemaVersion", io::schema_version}, {"problem", spec.source}, {"pade", io::to_json(section)}});
    if (!svg.empty() && prior) {
      svg_options o;
      for (const auto& p : section.poles) o.poles.push_back(p.point);
      std::ofstream(svg) << render_svg(prior->set, o);
    }
    std::cout << "n " << n << "  digits " << digits << "  poles " << section.poles.size();
    if (section.report) std::cout << "  nearFraction " << section.report->near_fraction;
    std::cout << '\n';
    return ok;
  } catch (const precision_error& e) {
    std::cerr << "mincap pade: " << e.what() << " (try --digits or MINCAP_DIGITS)\n";
    return numerical;
  } catch (const numerical_error& e) {
    std::cerr << "mincap pade: numerical failure: " << e.what() << '\n';
    return numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "mincap pade: " << e.what() << '\n';
    return bad_input;
  }
}

int cmd_check(const std::string& path) {
  io::result_file r;
  try {
    r = io::read_result(io::parse_file(path));
  } catch (const std::invalid_argument& e) {
    std::cerr << "mincap check: " << e.what() << '\n';
    return bad_input;
  }
  try {
    const auto [panels, threshold] = check_settings(r.problem);
    const auto c = run_checks(r.q, r.set, panels, threshold);
    auto line = [](const char* name, bool pass, double value) {
      std::cout << (pass ? "pass " : "FAIL ") << name << ' ' << value << '\n';
    };
    line("normalization", c.normalization.passed, c.normalization.residual);
    line("sResidual", c.s_property.passed(), c.s_property.report.value);
    for (const auto& i : c.geometry.items) line(i.name.c_str(), i.passed, i.value);
    if (c.normalization.passed != r.normalization.passed || c.s_property.passed() != r.s_property.passed() ||
        c.geometry.passed() != r.geometry.passed())
      std::cerr << "mincap check: flags differ from the stored ones\n";
    return c.passed() ? ok : check_failed;
  } catch (const numerical_error& e) {
    std::cerr << "mincap check: numerical failure: " << e.what() << '\n';
    return numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "mincap check: " << e.what() << '\n';
    return bad_input;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimal-capacity sets: solve, Pade poles, checks"};
  app.set_version_flag("--version", std::string(MINCAP_VERSION));
  app.require_subcommand(1);

  std::string spec, out, svg, result, check_path;
  double tol = 0.0;
  bool timings = false;
  int n = -1;
  unsigned digits = 0;

  auto* solve = app.add_subcommand("solve", "solve a problem spec and write a result file");
  solve->add_option("spec", spec, "problem spec (JSON)")->required();
  solve->add_option("--out", out, "result file")->required();
  solve->add_option("--svg", svg, "optional SVG drawing");
  solve->add_option("--tol", tol, "period residual tolerance");
  solve->add_flag("--timings", timings, "record wall-clock timings in the result metadata");

  auto* pade = app.add_subcommand("pade", "poles of the [n+1/n] Pade approximant at infinity");
  pade->add_option("spec", spec, "problem spec (JSON) with a function")->required();
  pade->add_option("-n", n, "approximant size");
  pade->add_option("--digits", digits, "working precision in decimal digits (default: MINCAP_DIGITS or by n)");
  pade->add_option("--out", out, "pole report")->required();
  pade->add_option("--result", result, "solved result whose set the poles are compared with");
  pade->add_option("--svg", svg, "pole overlay on the solved set (needs --result)");

  auto* check = app.add_subcommand("check", "re-run the checks on a stored result");
  check->add_option("result", check_path, "result file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : bad_input;
  }
  if (*solve) return cmd_solve(spec, out, svg, tol, timings);
  if (*pade) return cmd_pade(spec, n, digits, out, result, svg);
  return cmd_check(check_path);
}
