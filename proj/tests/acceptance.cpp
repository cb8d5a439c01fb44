// Acceptance run: one PASS/FAIL line per criterion, with measured values.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "mincap/pipeline.hpp"
#include "mincap/problems.hpp"

using namespace mincap;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds(clock_type::time_point t0) { return std::chrono::duration<double>(clock_type::now() - t0).count(); }

struct outcome {
  bool passed = false;
  std::string detail;
  std::vector<std::string> notes;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<outcome()>& body) {
  outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what(), {}};
  }
  if (!o.passed) ++failures;
  std::cout << (o.passed ? "PASS " : "FAIL ") << id << " " << title << ": " << o.detail << std::endl;
  for (const auto& n : o.notes) std::cout << "     note: " << n << std::endl;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string show(complex_t z) { return fmt("%.6f%+.6fi", z.real(), z.imag()); }

solve_spec spec_for(const function_expr& f, std::vector<std::string> topologies = {}) {
  solve_spec s;
  s.constraint = admissible_connectivity(f);
  s.topologies = std::move(topologies);
  return s;
}

struct solved_example {
  solve_result result;
  double seconds = 0.0;
};

/// Each example is solved once.
const solved_example& solved(const std::string& name) {
  static std::map<std::string, solved_example> cache;
  if (auto it = cache.find(name); it != cache.end()) return it->second;
  solve_spec s;
  if (name == "f1") s = spec_for(problems::f1());
  if (name == "f2") s = spec_for(problems::f2(pi / 6));
  if (name == "f3") s = spec_for(problems::f3(pi / 6));
  if (name == "f4") s = spec_for(problems::f4(pi / 6, std::sqrt(0.4)), {"{0,1,2,3,4,5,6,7}"});
  if (name == "f5") s = spec_for(problems::f5());
  const auto t0 = clock_type::now();
  solved_example e{solve_general(s), 0.0};
  e.seconds = seconds(t0);
  return cache.emplace(name, std::move(e)).first->second;
}

/// Direction of `arc` leaving `point`, read at distance r along the arc.
complex_t leaving_direction(const trajectory_arc& arc, complex_t point, double r) {
  std::vector<complex_t> s = arc.samples;
  if (std::abs(s.back() - point) < std::abs(s.front() - point)) std::reverse(s.begin(), s.end());
  for (std::size_t i = 1; i < s.size(); ++i)
    if (std::abs(s[i] - point) >= r) return (s[i] - point) / std::abs(s[i] - point);
  throw numerical_error("arc shorter than the probe radius");
}

/// Largest angle between a traced arc leaving an E1 point and the nearest
/// direction of the regular star of q there.
double star_deviation(const solve_result& r) {
  const double scale = r.set.scale();
  double worst = 0.0;
  for (std::size_t n = 0; n < r.set.nodes.size(); ++n) {
    if (r.set.nodes[n].kind != node_kind::e1) continue;
    const complex_t c = r.set.nodes[n].point;
    const int idx = r.q.singular_index(c, 1e-9 * scale);
    if (idx < 0) throw numerical_error("E1 point is not a zero of q");
    const auto star = star_directions(r.q, idx);
    int incident = 0;
    for (std::size_t a = 0; a < r.set.arcs.size(); ++a) {
      const auto [u, v] = r.set.arc_nodes[a];
      if (u != static_cast<int>(n) && v != static_cast<int>(n)) continue;
      ++incident;
      // the chord angle at radius r is the tangent angle plus O(r); two
      // radii remove the linear term
      const double r0 = 1e-4 * scale;
      const complex_t d1 = leaving_direction(r.set.arcs[a], c, r0), d2 = leaving_direction(r.set.arcs[a], c, 2.0 * r0);
      complex_t s = star[0];
      for (auto x : star)
        if (std::abs(std::arg(d1 / x)) < std::abs(std::arg(d1 / s))) s = x;
      worst = std::max(worst, std::abs(2.0 * std::arg(d1 / s) - std::arg(d2 / s)));
    }
    if (incident != static_cast<int>(star.size())) throw numerical_error("E1 point does not carry a full star");
  }
  return worst;
}

/// The set with node n moved by delta; incident arcs follow linearly in
/// arclength from their other end.
minimal_set displaced(const minimal_set& set, int n, complex_t delta) {
  minimal_set out = set;
  out.nodes[n].point += delta;
  for (std::size_t a = 0; a < out.arcs.size(); ++a) {
    const auto [u, v] = out.arc_nodes[a];
    if ((u == n) == (v == n)) continue;
    auto& p = out.arcs[a].samples;
    const auto s = detail::arclengths(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double t = s[i] / s.back();
      p[i] += delta * (u == n ? 1.0 - t : t);
    }
  }
  return out;
}

double s_of(const minimal_set& set, int M) { return s_residual(set, equilibrium(polylines(set.arcs), M)); }

laurent_series<complex_t> rational_series(const std::vector<complex_t>& pts, const std::vector<complex_t>& res, int N) {
  std::vector<complex_t> c(N + 1, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    complex_t pk = 1.0;
    for (int k = 1; k <= N; ++k) {
      c[k] += res[i] * pk;
      pk *= pts[i];
    }
  }
  return {0, N, c};
}

/// Matches reference points to computed ones; largest per-component error.
double match_error(const std::vector<complex_t>& reference, const std::vector<complex_t>& computed,
                   std::vector<std::string>& notes) {
  double worst = 0.0;
  for (auto p : reference) {
    complex_t best = computed.empty() ? complex_t(NAN, NAN) : computed[0];
    for (auto c : computed)
      if (std::abs(c - p) < std::abs(best - p)) best = c;
    const double err = std::max(std::abs(best.real() - p.real()), std::abs(best.imag() - p.imag()));
    worst = std::max(worst, std::isnan(err) ? INFINITY : err);
    notes.push_back("reference " + show(p) + "  computed " + show(best) + fmt("  error %.2e", err));
  }
  return worst;
}

std::vector<complex_t> zeros_with(const quadratic_differential& q, int multiplicity) {
  std::vector<complex_t> out;
  for (const auto& [z, m] : q.zeros())
    if (m == multiplicity) out.push_back(z);
  return out;
}

}  // namespace

int main() {
  std::cout.setf(std::ios::unitbuf);

  report(1, "symmetric four-point solver at phi = pi/6", [] {
    const auto t0 = clock_type::now();
    const auto r = solve_symmetric_four_point(pi / 6);
    const double t = seconds(t0);
    const double e_a = std::abs(r.a0 - 0.231584), e_z = std::abs(r.z5.real() - 0.481232);
    outcome o{e_a <= 1e-5 && e_z <= 1e-5 && t < 2.0,
              fmt("a0 = %.10f (target 0.231584, error %.2e), z5 = %.10f (target 0.481232, error %.2e), %.3f s", r.a0,
                  e_a, r.z5.real(), e_z, t)};
    return o;
  });

  report(2, "general solver on the seven-point example", [] {
    const auto& e = solved("f5");
    const auto& r = e.result;
    outcome o;
    const std::vector<complex_t> reference_e1{{-3.57021, 1.50570}, {-1.28112, 1.30991}, {1.54341, 3.19816}};
    const std::vector<complex_t> reference_e2{{0.64231, 2.79311}};
    const double err = std::max(match_error(reference_e1, zeros_with(r.q, 1), o.notes),
                                match_error(reference_e2, zeros_with(r.q, 2), o.notes));
    o.passed = err <= 1e-2 && e.seconds < 300.0;
    o.detail = fmt("largest component error %.3e (tolerance 1e-2), %s, %.1f s", err, r.topology.c_str(), e.seconds);
    // the reference values are consistent with branch points 3i and -1 in place
    // of 1+3i and 2i; the same comparison on that input
    const std::vector<complex_t> first{{0.0, 3.0}, {-4.0, 2.0}, {-4.0, 1.0}, {-1.0, 0.0}};
    const auto alt = solve_general(
        spec_for(sum({root_product(first, 4), root_product(problems::seven_point_second(), 3)})));
    std::vector<std::string> alt_notes;
    const double alt_err = std::max(match_error(reference_e1, zeros_with(alt.q, 1), alt_notes),
                                    match_error(reference_e2, zeros_with(alt.q, 2), alt_notes));
    o.notes.push_back(fmt("with branch points 3i and -1 in place of 1+3i and 2i: largest error %.3e", alt_err));
    for (auto& n : alt_notes) o.notes.push_back("  " + n);
    return o;
  });

  report(3, "segment example", [] {
    const auto& r = solved("f1").result;
    const auto e0 = r.set.e0_points();
    double end_err = INFINITY;
    if (e0.size() == 2)
      end_err = std::min(std::max(std::abs(e0[0] + 1.0), std::abs(e0[1] - 1.0)),
                         std::max(std::abs(e0[0] - 1.0), std::abs(e0[1] + 1.0)));
    const auto pl = r.q.poles();
    const bool q_exact = r.q.zeros().empty() && pl.size() == 2 &&
                         std::abs(pl[0] * pl[1] + 1.0) == 0.0 && std::abs(pl[0] + pl[1]) == 0.0;
    const double cap = equilibrium(r.set.arcs, 200).capacity.value;
    return outcome{end_err < 1e-8 && q_exact && std::abs(cap - 0.5) <= 1e-3,
                   fmt("endpoint error %.2e, q = 1/(z^2-1) %s, cap(M=200) = %.8f", end_err, q_exact ? "exactly" : "NOT exact",
                       cap)};
  });

  report(4, "square-root example arcs map to straight segments under z^2", [] {
    const auto& r = solved("f2").result;
    double worst = 0.0;
    for (const auto& arc : r.set.arcs) {
      const complex_t a = arc.samples.front() * arc.samples.front(), b = arc.samples.back() * arc.samples.back();
      const double len = std::abs(b - a);
      for (auto z : arc.samples) worst = std::max(worst, std::abs(cross(b - a, z * z - a)) / (len * len));
    }
    return outcome{!r.set.arcs.empty() && worst < 1e-5,
                   fmt("%zu arcs, max deviation %.2e of the segment length", r.set.arcs.size(), worst)};
  });

  report(5, "regular stars at bifurcation points", [] {
    const double d3 = star_deviation(solved("f3").result), d5 = star_deviation(solved("f5").result);
    return outcome{d3 < 1e-3 && d5 < 1e-3, fmt("max angle deviation %.2e rad (fourth root), %.2e rad (seven point)", d3, d5)};
  });

  report(6, "S-property residual and its sensitivity", [] {
    outcome o{true, ""};
    const int M = 100;
    double worst_s = 0.0, worst_ratio = INFINITY;
    for (const char* name : {"f1", "f3", "f5"}) {
      const auto& set = solved(name).result.set;
      const double s = s_of(set, M);
      worst_s = std::max(worst_s, s);
      for (std::size_t n = 0; n < set.nodes.size(); ++n) {
        if (set.nodes[n].kind != node_kind::e1) continue;
        for (complex_t d : {complex_t(0.1, 0), complex_t(-0.1, 0), complex_t(0, 0.1), complex_t(0, -0.1)}) {
          const double ratio = s_of(displaced(set, static_cast<int>(n), d), M) / s;
          worst_ratio = std::min(worst_ratio, ratio);
        }
      }
      o.notes.push_back(fmt("%s: residual %.3e", name, s));
    }
    o.passed = worst_s < 1e-3 && worst_ratio >= 10.0;
    o.detail = fmt("max residual %.3e (limit 1e-3), smallest growth under a 0.1 shift of one E1 point %.1fx", worst_s,
                   worst_ratio);
    return o;
  });

  report(7, "local minimality of the segment under bumps", [] {
    const auto& set = solved("f1").result.set;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = INFINITY;
    std::vector<std::vector<double>> shapes;
    for (int k = 0; k < 20; ++k) {
      shapes.push_back({u(rng), u(rng), u(rng)});
      worst = std::min(worst, local_min_probe(set, 0, bump_profile{1e-2, shapes.back()}));
    }
    // exponent of the mean response over the same shapes
    std::vector<double> amps{1e-2, 5e-3, 2.5e-3}, mean;
    for (double a : amps) {
      double acc = 0.0;
      for (const auto& s : shapes) acc += local_min_probe(set, 0, bump_profile{a, s});
      mean.push_back(acc / shapes.size());
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
      const double x = std::log(amps[i]), y = std::log(mean[i]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double k = amps.size(), slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    return outcome{worst > -1e-6 && slope >= 1.7 && slope <= 2.3,
                   fmt("min delta_cap %.3e over 20 bumps, fitted exponent %.3f", worst, slope)};
  });

  report(8, "geometric estimates on every example", [] {
    outcome o{true, ""};
    for (const char* name : {"f1", "f2", "f3", "f4", "f5"}) {
      const auto g = geometry_checks(solved(name).result.set, 100);
      o.passed = o.passed && g.passed();
      std::string items;
      for (const auto& i : g.items)
        if (!i.passed) items += " [" + i.name + "]";
      o.notes.push_back(std::string(name) + (g.passed() ? ": all items pass" : ": failing" + items));
    }
    o.detail = o.passed ? "hull and diameter bounds hold for all five examples" : "some items fail";
    return o;
  });

  report(9, "Pade pole clustering at desk scale", [] {
    const auto p1 = poles(compute_pade(problems::f1(), 10, default_pade_digits(10))).flattened();
    const auto r1 = pole_metrics(p1, solved("f1").result.set, 0.05, {0.0});
    const auto& set5 = solved("f5").result.set;
    const auto p5 = poles(compute_pade(problems::f5(), 25, 120)).flattened();
    const auto r5 = pole_metrics(p5, set5, 0.05 * set5.scale(), {0.0});
    return outcome{r1.near_fraction == 1.0 && r5.near_fraction >= 0.85,
                   fmt("segment n=10 nearFraction %.3f, seven point n=25 (120 digits) nearFraction %.3f (%zu poles, %zu spurious)",
                       r1.near_fraction, r5.near_fraction, p5.size(), r5.spurious.size())};
  });

  report(10, "Pade recovers a rational function", [] {
    const std::vector<complex_t> pts{{0.5, 0.2}, {-1.0, 0.7}, {0.3, -1.1}, {1.4, 0.0}, {-0.6, -0.4}};
    const std::vector<complex_t> res{1.0, {0.5, 0.5}, -0.7, {0.2, -1.0}, 1.3};
    const auto p = poles(compute_pade(rational_series(pts, res, 40), 8, 40));
    double worst = 0.0;
    for (auto z : pts) {
      double best = INFINITY;
      for (const auto& x : p.finite) best = std::min(best, std::abs(z - x.point));
      worst = std::max(worst, best);
    }
    return outcome{p.finite.size() == 5 && worst < 1e-8,
                   fmt("%zu finite poles, largest pole error %.2e", p.finite.size(), worst)};
  });

  report(11, "capacity refinement on [-1, 1]", [] {
    const auto& set = solved("f1").result.set;
    std::vector<double> caps;
    for (int M : {50, 100, 200, 400}) caps.push_back(equilibrium(set.arcs, M).capacity.value);
    bool decreasing = true;
    for (std::size_t i = 2; i < caps.size(); ++i)
      decreasing = decreasing && std::abs(caps[i] - caps[i - 1]) < std::abs(caps[i - 1] - caps[i - 2]);
    return outcome{decreasing && std::abs(caps.back() - 0.5) <= 1e-3,
                   fmt("caps %.8f %.8f %.8f %.8f", caps[0], caps[1], caps[2], caps[3])};
  });

  std::cout << (failures ? std::to_string(failures) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failures ? 1 : 0;
}
