#pragma once

// solve -> capacity -> checks -> Pade, as run by the command-line tool.

#include <chrono>

#include "io.hpp"

#ifndef MINCAP_VERSION
#define MINCAP_VERSION "unversioned"
#endif

namespace mincap {

struct run_options {
  bool timings = false;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

struct check_outcome {
  normalization_report normalization;
  io::s_check s_property;
  geometry_report geometry;
  bool passed() const { return normalization.passed && s_property.passed() && geometry.passed(); }
};

/// The three certificate checks on stored geometry; `eq`, when given, is a
/// refined equilibrium of the whole set.
inline check_outcome run_checks(const quadratic_differential& q, const minimal_set& set, int panels,
                                double s_threshold, const equilibrium_result* eq = nullptr) {
  check_outcome out;
  out.normalization = validate_normalization(q);
  equilibrium_result local;
  if (!eq) {
    local = equilibrium_refined(polylines(set.arcs), panels);
    eq = &local;
  }
  out.s_property.report = s_residual_detail(set, *eq);
  out.s_property.threshold = s_threshold;
  out.geometry = geometry_checks(set, panels, eq);
  return out;
}

inline io::pade_section run_pade(const function_expr& f, int n, unsigned digits, const minimal_set* set,
                                 double epsilon_fraction, const std::vector<complex_t>& polar) {
  const auto approx = compute_pade(f, n, digits);
  auto section = io::make_pade_section(approx, poles(approx));
  if (set && !set->arcs.empty())
    section.report = pole_metrics(poles(approx).flattened(), *set, epsilon_fraction * set->scale(), polar);
  return section;
}

inline io::result_file run_solve(const io::problem_spec& spec, const run_options& opt = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  io::result_file r;
  r.problem = spec.source;
  auto solved = solve_general(spec.solver);
  const double t_solve = detail::seconds_since(t0);
  r.topology = solved.topology;
  r.q = solved.q;
  r.set = std::move(solved.set);
  r.certificate = solved.certificate;
  r.candidates = std::move(solved.candidates);

  const auto t1 = std::chrono::steady_clock::now();
  const auto eq = equilibrium_refined(polylines(r.set.arcs), spec.capacity_panels);
  r.capacity = eq.capacity;
  const auto checks = run_checks(r.q, r.set, spec.capacity_panels, spec.s_threshold, &eq);
  r.normalization = checks.normalization;
  r.s_property = checks.s_property;
  r.geometry = checks.geometry;
  const double t_checks = detail::seconds_since(t1);

  double t_pade = 0.0;
  if (spec.pade_n >= 0 && spec.function) {
    const auto t2 = std::chrono::steady_clock::now();
    const unsigned digits = spec.pade_digits ? spec.pade_digits : default_pade_digits(spec.pade_n);
    r.pade = run_pade(*spec.function, spec.pade_n, digits, &r.set, spec.pade_epsilon_fraction, spec.polar_singularities);
    t_pade = detail::seconds_since(t2);
  }
  r.metadata = {{"generator", "mincap"},
                {"version", MINCAP_VERSION},
                {"tolerances",
                 {{"solver", io::number(spec.solver.tolerance)},
                  {"capacityPanels", spec.capacity_panels},
                  {"sResidualThreshold", io::number(spec.s_threshold)}}}};
  if (opt.timings)
    r.metadata["timings"] = {{"solve", t_solve}, {"checks", t_checks}, {"pade", t_pade}};
  return r;
}

/// Panels and S threshold recorded in a result's problem spec.
inline std::pair<int, double> check_settings(const io::json& problem) {
  const auto cap = problem.is_object() && problem.contains("capacity") ? problem["capacity"] : io::json::object();
  return {io::value_or(cap, "panels", 100), io::value_or(cap, "sResidualThreshold", 1e-3)};
}

}  // namespace mincap
