#pragma once

// JSON forms of problem specs and result files. Complex numbers are
// [re, im] pairs; doubles are written in shortest round-trip form and
// non-finite values as strings, so load(save(x)) is bit-exact.

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "capacity.hpp"
#include "pade.hpp"
#include "solver.hpp"

namespace mincap::io {

using json = nlohmann::ordered_json;

inline constexpr int schema_version = 1;

// ---------------------------------------------------------------------------
// scalars

inline json number(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  return v;
}

inline double read_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (s == "Infinity") return std::numeric_limits<double>::infinity();
    if (s == "-Infinity") return -std::numeric_limits<double>::infinity();
  }
  throw input_error("expected a number, got " + j.dump());
}

inline json point(complex_t z) { return json::array({number(z.real()), number(z.imag())}); }

inline complex_t read_point(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_array() || j.size() != 2) throw input_error("expected a complex number [re, im], got " + j.dump());
  return {read_number(j[0]), read_number(j[1])};
}

inline json points(const std::vector<complex_t>& v) {
  json a = json::array();
  for (auto z : v) a.push_back(point(z));
  return a;
}

inline std::vector<complex_t> read_points(const json& j) {
  if (!j.is_array()) throw input_error("expected a list of complex numbers");
  std::vector<complex_t> out;
  for (const auto& e : j) out.push_back(read_point(e));
  return out;
}

/// Member access that reports the missing key by name.
inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw input_error(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

template <class T>
T value_or(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw input_error(std::string("field \"") + key + "\" has the wrong type");
  }
}

// ---------------------------------------------------------------------------
// function expressions

inline json to_json(const function_expr& f) {
  return std::visit(
      [](const auto& n) -> json {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, constant_node>) {
          return {{"kind", "constant"}, {"value", point(n.value)}};
        } else if constexpr (std::is_same_v<T, root_product_node>) {
          return {{"kind", "rootProduct"}, {"points", points(n.points)}, {"rootOrder", n.order}, {"power", n.power}};
        } else if constexpr (std::is_same_v<T, monomial_node>) {
          return {{"kind", "monomial"}, {"power", n.power}, {"coefficient", point(n.coefficient)}};
        } else if constexpr (std::is_same_v<T, fractional_power_node>) {
          return {{"kind", "fractionalPower"},
                  {"child", to_json(*n.child)},
                  {"exponent", json::array({n.exponent.num, n.exponent.den})},
                  {"seeds", points(n.seeds)}};
        } else {
          const char* kind = std::is_same_v<T, sum_node> ? "sum" : std::is_same_v<T, difference_node> ? "difference" : "product";
          json c = json::array();
          for (const auto& x : n.children) c.push_back(to_json(x));
          return {{"kind", kind}, {"children", c}};
        }
      },
      f.node());
}

inline function_expr read_function(const json& j) {
  const auto kind = field(j, "kind").get<std::string>();
  auto children = [&] {
    std::vector<function_expr> c;
    for (const auto& x : field(j, "children")) c.push_back(read_function(x));
    return c;
  };
  if (kind == "constant") return constant(read_point(field(j, "value")));
  if (kind == "rootProduct")
    return root_product(read_points(field(j, "points")), field(j, "rootOrder").get<int>(), value_or(j, "power", 1));
  if (kind == "monomial") return monomial(field(j, "power").get<int>(), j.contains("coefficient") ? read_point(j["coefficient"]) : 1.0);
  if (kind == "sum") return sum(children());
  if (kind == "difference") return difference(children());
  if (kind == "product") return product(children());
  if (kind == "fractionalPower") {
    const auto& e = field(j, "exponent");
    if (!e.is_array() || e.size() != 2) throw input_error("exponent must be [numerator, denominator]");
    return fractional_power(read_function(field(j, "child")), {e[0].get<long>(), e[1].get<long>()},
                            j.contains("seeds") ? read_points(j["seeds"]) : std::vector<complex_t>{});
  }
  throw input_error("unknown function node kind \"" + kind + "\"");
}

// ---------------------------------------------------------------------------
// problem specs

struct problem_spec {
  std::string name;
  std::optional<function_expr> function;
  solve_spec solver;
  int capacity_panels = 100;
  double s_threshold = 1e-3;
  int pade_n = -1;             // negative: no Pade section
  unsigned pade_digits = 0;    // 0: default for n
  double pade_epsilon_fraction = 0.05;
  std::vector<complex_t> polar_singularities;
  json source;                 // the spec as read, echoed into results
};

inline connectivity_mode read_mode(const std::string& s) {
  if (s == "exact") return connectivity_mode::exact;
  if (s == "atLeast" || s == "at-least") return connectivity_mode::at_least;
  throw input_error("unknown connectivity mode \"" + s + "\"");
}

inline const char* to_string(connectivity_mode m) { return m == connectivity_mode::exact ? "exact" : "atLeast"; }

inline json to_json(const connectivity_constraint& c) {
  json g = json::array();
  for (const auto& grp : c.groups)
    g.push_back({{"points", points(grp.points)}, {"modulus", grp.modulus}, {"optional", grp.optional}});
  return {{"groups", g}, {"mode", to_string(c.mode)}};
}

inline connectivity_constraint read_constraint(const json& j) {
  connectivity_constraint c;
  for (const auto& g : field(j, "groups")) {
    branch_group b;
    b.points = read_points(field(g, "points"));
    b.modulus = value_or(g, "modulus", 2);
    b.optional = value_or(g, "optional", false);
    if (b.modulus < 1) throw input_error("group modulus must be positive");
    c.groups.push_back(std::move(b));
  }
  c.mode = read_mode(value_or<std::string>(j, "mode", "exact"));
  return c;
}

inline problem_spec read_problem(const json& j) {
  if (!j.is_object()) throw input_error("problem spec must be a JSON object");
  if (value_or(j, "schemaVersion", schema_version) != schema_version) throw input_error("unsupported schemaVersion");
  problem_spec p;
  p.source = j;
  p.name = value_or<std::string>(j, "name", "");
  if (j.contains("function")) {
    p.function = read_function(j["function"]);
    p.solver.constraint = admissible_connectivity(*p.function);
  } else if (j.contains("groups")) {
    p.solver.constraint = read_constraint(j);
  } else {
    throw input_error("problem spec needs \"function\" or \"groups\"");
  }
  const json solver = j.contains("solver") ? j["solver"] : json::object();
  p.solver.tolerance = value_or(solver, "tolerance", p.solver.tolerance);
  p.solver.max_iterations = value_or(solver, "maxIterations", p.solver.max_iterations);
  p.solver.max_starts = value_or(solver, "maxStarts", p.solver.max_starts);
  p.solver.rng_seed = value_or(solver, "seed", p.solver.rng_seed);
  p.solver.capacity_panels = value_or(solver, "rankingPanels", p.solver.capacity_panels);
  p.solver.max_candidates = value_or(solver, "maxCandidates", p.solver.max_candidates);
  p.solver.topologies = value_or(solver, "topologies", std::vector<std::string>{});
  if (solver.contains("seedsE1")) p.solver.seeds_e1 = read_points(solver["seedsE1"]);
  if (solver.contains("seedsE2")) p.solver.seeds_e2 = read_points(solver["seedsE2"]);
  if (!(p.solver.tolerance > 0.0)) throw input_error("solver tolerance must be positive");
  // seeds must match some candidate's unknown counts
  if (!p.solver.seeds_e1.empty() || !p.solver.seeds_e2.empty()) {
    bool fits = false;
    for (const auto& c : enumerate_connectivity(p.solver.constraint))
      fits = fits || ((p.solver.seeds_e1.empty() || static_cast<int>(p.solver.seeds_e1.size()) == c.e1_count) &&
                      (p.solver.seeds_e2.empty() || static_cast<int>(p.solver.seeds_e2.size()) == c.e2_count));
    if (!fits) throw input_error("seed counts do not match any candidate topology");
  }
  const json cap = j.contains("capacity") ? j["capacity"] : json::object();
  p.capacity_panels = value_or(cap, "panels", p.capacity_panels);
  p.s_threshold = value_or(cap, "sResidualThreshold", p.s_threshold);
  if (p.capacity_panels < 8) throw input_error("capacity panels must be at least 8");
  if (j.contains("pade")) {
    const auto& pd = j["pade"];
    p.pade_n = value_or(pd, "n", 10);
    p.pade_digits = value_or(pd, "digits", 0u);
    p.pade_epsilon_fraction = value_or(pd, "epsilonFraction", p.pade_epsilon_fraction);
    if (pd.contains("polarSingularities")) p.polar_singularities = read_points(pd["polarSingularities"]);
  }
  return p;
}

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw input_error(path + ": malformed JSON: " + e.what());
  }
}

inline void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write " + path);
  out << j.dump(1) << '\n';
  if (!out) throw input_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// geometry

inline json to_json(const quadratic_differential& q) {
  json z = json::array();
  for (const auto& [p, m] : q.zeros()) z.push_back({{"point", point(p)}, {"multiplicity", m}});
  return {{"poles", points(q.poles())}, {"zeros", z}};
}

inline quadratic_differential read_q(const json& j) {
  std::vector<std::pair<complex_t, int>> zeros;
  for (const auto& z : field(j, "zeros")) zeros.emplace_back(read_point(field(z, "point")), field(z, "multiplicity").get<int>());
  return {read_points(field(j, "poles")), zeros};
}

inline anchor_kind read_anchor_kind(const std::string& s) {
  for (auto k : {anchor_kind::branch_point, anchor_kind::bifurcation, anchor_kind::critical_point, anchor_kind::open})
    if (s == to_string(k)) return k;
  throw input_error("unknown anchor kind \"" + s + "\"");
}

inline json to_json(const anchor& a) {
  return {{"kind", to_string(a.kind)}, {"index", a.index}, {"point", point(a.point)}};
}

inline anchor read_anchor(const json& j) {
  return {read_anchor_kind(field(j, "kind").get<std::string>()), field(j, "index").get<int>(), read_point(field(j, "point"))};
}

inline json to_json(const trajectory_arc& a) {
  return {{"start", to_json(a.start)},
          {"end", to_json(a.end)},
          {"imaginaryLength", number(a.imaginary_length)},
          {"endMismatch", number(a.end_mismatch)},
          {"period", point(a.period)},
          {"samples", points(a.samples)}};
}

inline trajectory_arc read_arc(const json& j) {
  trajectory_arc a;
  a.start = read_anchor(field(j, "start"));
  a.end = read_anchor(field(j, "end"));
  a.imaginary_length = read_number(field(j, "imaginaryLength"));
  a.end_mismatch = read_number(field(j, "endMismatch"));
  a.period = read_point(field(j, "period"));
  a.samples = read_points(field(j, "samples"));
  if (a.samples.size() < 2) throw input_error("an arc needs at least two samples");
  return a;
}

inline json to_json(const minimal_set& s) {
  json nodes = json::array(), e2 = json::array(), arcs = json::array(), ends = json::array(), comps = json::array();
  for (const auto& n : s.nodes)
    nodes.push_back({{"point", point(n.point)}, {"kind", n.kind == node_kind::e0 ? "E0" : "E1"}, {"index", n.index}});
  for (const auto& [p, j] : s.e2) e2.push_back({{"point", point(p)}, {"order", j}});
  for (const auto& a : s.arcs) arcs.push_back(to_json(a));
  for (const auto& [a, b] : s.arc_nodes) ends.push_back(json::array({a, b}));
  for (const auto& c : s.components) comps.push_back(c);
  return {{"nodes", nodes}, {"E2", e2}, {"arcNodes", ends}, {"components", comps}, {"arcs", arcs}};
}

inline minimal_set read_set(const json& j) {
  minimal_set s;
  for (const auto& n : field(j, "nodes")) {
    const auto kind = field(n, "kind").get<std::string>();
    if (kind != "E0" && kind != "E1") throw input_error("node kind must be E0 or E1");
    s.nodes.push_back({read_point(field(n, "point")), kind == "E0" ? node_kind::e0 : node_kind::e1, field(n, "index").get<int>()});
  }
  for (const auto& e : field(j, "E2")) s.e2.emplace_back(read_point(field(e, "point")), field(e, "order").get<int>());
  for (const auto& a : field(j, "arcs")) s.arcs.push_back(read_arc(a));
  for (const auto& e : field(j, "arcNodes")) s.arc_nodes.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  for (const auto& c : field(j, "components")) s.components.push_back(c.get<std::vector<int>>());
  if (s.arc_nodes.size() != s.arcs.size()) throw input_error("arcNodes and arcs differ in length");
  for (const auto& [a, b] : s.arc_nodes)
    if (a < 0 || b < 0 || a >= static_cast<int>(s.nodes.size()) || b >= static_cast<int>(s.nodes.size()))
      throw input_error("arc node index out of range");
  return s;
}

// ---------------------------------------------------------------------------
// reports

inline json to_json(const capacity_estimate& c) {
  return {{"value", number(c.value)},
          {"energy", number(c.energy)},
          {"discretizationSize", c.discretization_size},
          {"refinementDelta", number(c.refinement_delta)}};
}

inline capacity_estimate read_capacity(const json& j) {
  capacity_estimate c;
  c.value = read_number(field(j, "value"));
  c.energy = read_number(field(j, "energy"));
  c.discretization_size = field(j, "discretizationSize").get<int>();
  c.refinement_delta = read_number(field(j, "refinementDelta"));
  return c;
}

inline json to_json(const normalization_report& r) {
  return {{"residual", number(r.residual)}, {"radius", number(r.radius)}, {"passed", r.passed}};
}

inline normalization_report read_normalization(const json& j) {
  return {read_number(field(j, "residual")), read_number(field(j, "radius")), field(j, "passed").get<bool>()};
}

inline json to_json(const geometry_report& g) {
  json items = json::array();
  for (const auto& i : g.items)
    items.push_back({{"name", i.name},
                     {"passed", i.passed},
                     {"value", number(i.value)},
                     {"lower", number(i.lower)},
                     {"upper", number(i.upper)},
                     {"tolerance", number(i.tolerance)}});
  return {{"passed", g.passed()}, {"items", items}};
}

inline geometry_report read_geometry(const json& j) {
  geometry_report g;
  for (const auto& i : field(j, "items"))
    g.items.push_back({field(i, "name").get<std::string>(), field(i, "passed").get<bool>(), read_number(field(i, "value")),
                       read_number(field(i, "lower")), read_number(field(i, "upper")), read_number(field(i, "tolerance"))});
  return g;
}

struct s_check {
  s_residual_report report;
  double threshold = 1e-3;
  bool passed() const { return report.value < threshold; }
};

inline json to_json(const s_check& s) {
  return {{"value", number(s.report.value)},
          {"samples", s.report.samples},
          {"skipped", s.report.skipped},
          {"threshold", number(s.threshold)},
          {"passed", s.passed()}};
}

inline s_check read_s_check(const json& j) {
  s_check s;
  s.report.value = read_number(field(j, "value"));
  s.report.samples = field(j, "samples").get<int>();
  s.report.skipped = field(j, "skipped").get<int>();
  s.threshold = read_number(field(j, "threshold"));
  return s;
}

inline json to_json(const candidate_report& c) {
  return {{"topology", c.encoding},
          {"converged", c.converged},
          {"realized", c.realized},
          {"residual", number(c.residual)},
          {"capacity", number(c.capacity)},
          {"starts", c.starts},
          {"failure", c.failure}};
}

inline candidate_report read_candidate(const json& j) {
  candidate_report c;
  c.encoding = field(j, "topology").get<std::string>();
  c.converged = field(j, "converged").get<bool>();
  c.realized = field(j, "realized").get<bool>();
  c.residual = read_number(field(j, "residual"));
  c.capacity = read_number(field(j, "capacity"));
  c.starts = field(j, "starts").get<int>();
  c.failure = field(j, "failure").get<std::string>();
  return c;
}

inline const char* to_string(pole_class c) {
  switch (c) {
    case pole_class::near_set: return "nearSet";
    case pole_class::systematic: return "systematic";
    default: return "spurious";
  }
}

inline pole_class read_pole_class(const std::string& s) {
  if (s == "nearSet") return pole_class::near_set;
  if (s == "systematic") return pole_class::systematic;
  if (s == "spurious") return pole_class::spurious;
  throw input_error("unknown pole class \"" + s + "\"");
}

/// Pade approximant summary plus the pole report; multiprecision
/// coefficients are stored rounded to double.
struct pade_section {
  int n = 0;
  unsigned digits = 0;
  int numerator_degree = 0, denominator_degree = 0, w_shift = 0, origin_order = 0;
  double order_residual = 0.0;
  std::vector<complex_t> numerator, denominator;
  std::vector<pade_pole> poles;
  std::optional<pole_report> report;
};

inline pade_section make_pade_section(const pade_approximant& a, const pade_poles& p) {
  pade_section s;
  s.n = a.n;
  s.digits = a.digits;
  s.numerator_degree = a.numerator_degree;
  s.denominator_degree = a.denominator_degree;
  s.w_shift = a.w_shift;
  s.origin_order = p.origin_order;
  s.order_residual = a.order_residual;
  s.numerator = a.numerator_values();
  s.denominator = a.denominator_values();
  s.poles = p.finite;
  return s;
}

inline json to_json(const pade_section& s) {
  json poles = json::array();
  for (const auto& p : s.poles) poles.push_back({{"point", point(p.point)}, {"multiplicity", p.multiplicity}});
  json j = {{"n", s.n},
            {"digits", s.digits},
            {"numeratorDegree", s.numerator_degree},
            {"denominatorDegree", s.denominator_degree},
            {"wShift", s.w_shift},
            {"originOrder", s.origin_order},
            {"orderResidual", number(s.order_residual)},
            {"numeratorCoeffs", points(s.numerator)},
            {"denominatorCoeffs", points(s.denominator)},
            {"poles", poles}};
  if (s.report) {
    json classes = json::array();
    for (auto c : s.report->classes) classes.push_back(to_string(c));
    j["report"] = {{"epsilon", number(s.report->epsilon)},
                   {"nearFraction", number(s.report->near_fraction)},
                   {"discrepancy", number(s.report->discrepancy)},
                   {"poles", points(s.report->poles)},
                   {"classes", classes},
                   {"systematic", points(s.report->systematic)},
                   {"spurious", points(s.report->spurious)}};
  }
  return j;
}

inline pade_section read_pade(const json& j) {
  pade_section s;
  s.n = field(j, "n").get<int>();
  s.digits = field(j, "digits").get<unsigned>();
  s.numerator_degree = field(j, "numeratorDegree").get<int>();
  s.denominator_degree = field(j, "denominatorDegree").get<int>();
  s.w_shift = field(j, "wShift").get<int>();
  s.origin_order = field(j, "originOrder").get<int>();
  s.order_residual = read_number(field(j, "orderResidual"));
  s.numerator = read_points(field(j, "numeratorCoeffs"));
  s.denominator = read_points(field(j, "denominatorCoeffs"));
  for (const auto& p : field(j, "poles")) s.poles.push_back({read_point(field(p, "point")), field(p, "multiplicity").get<int>()});
  if (j.contains("report")) {
    const auto& r = j["report"];
    pole_report rep;
    rep.epsilon = read_number(field(r, "epsilon"));
    rep.near_fraction = read_number(field(r, "nearFraction"));
    rep.discrepancy = read_number(field(r, "discrepancy"));
    rep.poles = read_points(field(r, "poles"));
    for (const auto& c : field(r, "classes")) rep.classes.push_back(read_pole_class(c.get<std::string>()));
    rep.systematic = read_points(field(r, "systematic"));
    rep.spurious = read_points(field(r, "spurious"));
    s.report = rep;
  }
  return s;
}

// ---------------------------------------------------------------------------
// result files

struct result_file {
  json problem;
  std::string topology;
  quadratic_differential q;
  minimal_set set;
  capacity_estimate capacity;
  normalization_report normalization;
  s_check s_property;
  geometry_report geometry;
  solve_certificate certificate;
  std::vector<candidate_report> candidates;
  std::optional<pade_section> pade;
  json metadata = json::object();

  bool checks_passed() const { return normalization.passed && s_property.passed() && geometry.passed(); }
};

inline json to_json(const result_file& r) {
  json cands = json::array();
  for (const auto& c : r.candidates) cands.push_back(to_json(c));
  json j = {{"schemaVersion", schema_version},
            {"problem", r.problem},
            {"topology", r.topology},
            {"q", to_json(r.q)},
            {"capacity", to_json(r.capacity)},
            {"checks",
             {{"passed", r.checks_passed()},
              {"normalization", to_json(r.normalization)},
              {"sResidual", to_json(r.s_property)},
              {"geometry", to_json(r.geometry)}}},
            {"certificate",
             {{"periodResidual", number(r.certificate.period_residual)},
              {"shootingMismatch", number(r.certificate.shooting_mismatch)},
              {"newtonResidual", number(r.certificate.newton_residual)}}},
            {"candidates", cands},
            {"minimalSet", to_json(r.set)}};
  if (r.pade) j["pade"] = to_json(*r.pade);
  j["metadata"] = r.metadata;
  return j;
}

inline result_file read_result(const json& j) {
  if (!j.is_object()) throw input_error("result file must be a JSON object");
  if (field(j, "schemaVersion").get<int>() != schema_version) throw input_error("unsupported schemaVersion");
  try {
    result_file r;
    r.problem = field(j, "problem");
    r.topology = field(j, "topology").get<std::string>();
    r.q = read_q(field(j, "q"));
    r.set = read_set(field(j, "minimalSet"));
    r.capacity = read_capacity(field(j, "capacity"));
    const auto& checks = field(j, "checks");
    r.normalization = read_normalization(field(checks, "normalization"));
    r.s_property = read_s_check(field(checks, "sResidual"));
    r.geometry = read_geometry(field(checks, "geometry"));
    const auto& cert = field(j, "certificate");
    r.certificate.period_residual = read_number(field(cert, "periodResidual"));
    r.certificate.shooting_mismatch = read_number(field(cert, "shootingMismatch"));
    r.certificate.newton_residual = read_number(field(cert, "newtonResidual"));
    for (const auto& c : field(j, "candidates")) r.candidates.push_back(read_candidate(c));
    if (j.contains("pade")) r.pade = read_pade(j["pade"]);
    if (j.contains("metadata")) r.metadata = j["metadata"];
    return r;
  } catch (const json::exception& e) {
    throw input_error(std::string("malformed result file: ") + e.what());
  }
}

}  // namespace mincap::io
