#pragma once

// Locating the free zeros of the quadratic differential (bifurcation points
// and critical points of the Green function) so that the critical
// trajectories realize a prescribed connectivity.

#include <Eigen/Dense>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "capacity.hpp"
#include "function_expr.hpp"
#include "polyroots.hpp"
#include "qdiff.hpp"

namespace mincap {

// ---------------------------------------------------------------------------
// Four symmetric points e^{+-i phi}, -e^{+-i phi}

struct four_point_result {
  double a0 = 0.0;
  complex_t z5, z6;
  double integral_error = 0.0;  // quadrature error estimate at the root
};

namespace detail {

/// The bifurcation points are +-sqrt(a) where a in (0,1) zeroes
///   I(a) = lim_c [ int_a^c g(x) dx - int_{-c}^0 g(x) dx ],
///   g(x) = |sqrt((x - a) / (x (x^2 - 2 x cos 2phi + 1)))|,
/// the image of the problem under z -> z^2. The tails beyond |x| = 1 are
/// folded onto (0, 1] by x = +-1/u.
inline double four_point_integral(double a, double phi, double* err = nullptr) {
  const double c = std::cos(2.0 * phi);
  boost::math::quadrature::tanh_sinh<double> ts;
  double e1 = 0, e2 = 0, e3 = 0;
  auto g = [&](double x) { return std::sqrt(std::abs((x - a) / (x * (x * x - 2.0 * x * c + 1.0)))); };
  const double right = a < 1.0 ? ts.integrate(g, a, 1.0, 1e-12, &e1) : 0.0;
  const double left = ts.integrate([&](double x) { return g(-x); }, 0.0, 1.0, 1e-12, &e2);
  // difference of the two tails, written without cancellation
  auto tail = [&](double u) {
    const double d1 = 1.0 - 2.0 * c * u + u * u, d2 = 1.0 + 2.0 * c * u + u * u;
    const double A = std::sqrt((1.0 - a * u) / d1), B = std::sqrt((1.0 + a * u) / d2);
    return (4.0 * c - 2.0 * a - 2.0 * a * u * u) / (d1 * d2 * (A + B));
  };
  const double tails = ts.integrate(tail, 0.0, 1.0, 1e-12, &e3);
  if (err) *err = e1 + e2 + e3;
  return right - left + tails;
}

}  // namespace detail

/// phi in (0, pi/2). For phi > pi/4 the configuration is the rotation by i
/// of the one at pi/2 - phi, so z5 is imaginary and a0 = z5^2 < 0.
inline four_point_result solve_symmetric_four_point(double phi) {
  if (!(phi > 0.0 && phi < 0.5 * pi)) throw input_error("phi must lie in (0, pi/2)");
  four_point_result r;
  if (std::abs(phi - 0.25 * pi) < 1e-12) return r;
  const bool rotated = phi > 0.25 * pi;
  const double p = rotated ? 0.5 * pi - phi : phi;
  auto f = [&](double a) { return detail::four_point_integral(a, p); };
  double lo = 1e-14, hi = 1.0;
  const double flo = f(lo), fhi = f(hi);
  if (!(flo > 0.0 && fhi < 0.0)) throw numerical_error("four-point integral does not change sign on (0, 1)");
  boost::uintmax_t iters = 200;
  auto bracket = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, [](double x, double y) { return std::abs(x - y) <= 1e-15 * std::max(1.0, x); }, iters);
  const double a = 0.5 * (bracket.first + bracket.second);
  double err = 0.0;
  detail::four_point_integral(a, p, &err);
  if (err > 1e-8) throw numerical_error("quadrature tail bound not met", {}, err);
  r.integral_error = err;
  const double root = std::sqrt(a);
  if (rotated) {
    r.a0 = -a;
    r.z5 = {0.0, root};
  } else {
    r.a0 = a;
    r.z5 = root;
  }
  r.z6 = -r.z5;
  return r;
}

// ---------------------------------------------------------------------------
// Candidate topologies

struct candidate_topology {
  /// Blocks of active points (indices into the flattened group points).
  std::vector<std::vector<int>> blocks;
  std::vector<int> inactive;
  int e1_count = 0;  // generic count of simple bifurcation points
  int e2_count = 0;  // double zeros off the set, one per extra component
  std::string encoding;
};

inline std::string encode_topology(const std::vector<std::vector<int>>& blocks, const std::vector<int>& inactive) {
  std::ostringstream os;
  for (const auto& b : blocks) {
    os << '{';
    for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i];
    os << '}';
  }
  if (!inactive.empty()) {
    os << " inactive{";
    for (std::size_t i = 0; i < inactive.size(); ++i) os << (i ? "," : "") << inactive[i];
    os << '}';
  }
  return os.str();
}

/// Set partitions of the active points with every block holding >= 2 points
/// and, for every group, a multiple of the group modulus. Optional points may
/// be left out (inactive).
inline std::vector<candidate_topology> enumerate_connectivity(const connectivity_constraint& c) {
  std::vector<int> group_of, optional_pts;
  for (std::size_t g = 0; g < c.groups.size(); ++g)
    for (std::size_t i = 0; i < c.groups[g].points.size(); ++i) {
      if (c.groups[g].optional) optional_pts.push_back(static_cast<int>(group_of.size()));
      group_of.push_back(static_cast<int>(g));
    }
  const int n = static_cast<int>(group_of.size());
  if (optional_pts.size() > 16 || n > 14) throw input_error("too many branch points to enumerate");
  std::vector<candidate_topology> out;
  for (unsigned mask = 0; mask < (1u << optional_pts.size()); ++mask) {
    std::vector<int> inactive, active;
    for (std::size_t k = 0; k < optional_pts.size(); ++k)
      if (mask & (1u << k)) inactive.push_back(optional_pts[k]);
    for (int i = 0; i < n; ++i)
      if (std::find(inactive.begin(), inactive.end(), i) == inactive.end()) active.push_back(i);
    const int m = static_cast<int>(active.size());
    if (m < 2) continue;
    // restricted growth strings
    std::vector<int> label(m, 0);
    while (true) {
      const int nb = *std::max_element(label.begin(), label.end()) + 1;
      std::vector<std::vector<int>> blocks(nb);
      for (int i = 0; i < m; ++i) blocks[label[i]].push_back(active[i]);
      bool ok = true;
      for (const auto& b : blocks) {
        if (b.size() < 2) { ok = false; break; }
        std::vector<int> count(c.groups.size(), 0);
        for (int p : b) ++count[group_of[p]];
        for (std::size_t g = 0; g < c.groups.size(); ++g)
          if (count[g] % c.groups[g].modulus != 0) ok = false;
      }
      if (ok) {
        candidate_topology t;
        t.blocks = blocks;
        t.inactive = inactive;
        for (const auto& b : blocks) t.e1_count += static_cast<int>(b.size()) - 2;
        t.e2_count = nb - 1;
        t.encoding = encode_topology(blocks, inactive);
        out.push_back(std::move(t));
      }
      // next restricted growth string
      int i = m - 1;
      while (i > 0 && label[i] > *std::max_element(label.begin(), label.begin() + i)) --i;
      if (i == 0) break;
      ++label[i];
      for (int j = i + 1; j < m; ++j) label[j] = 0;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const candidate_topology& a, const candidate_topology& b) {
    if (a.inactive.size() != b.inactive.size()) return a.inactive.size() < b.inactive.size();
    return a.encoding < b.encoding;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Extraction of the minimal set from a solved q

struct extract_options {
  double level_tolerance = 1e-7;  // |Re int sqrt(q)| below this puts a zero on the set
  double dedupe_fraction = 1e-3;  // Hausdorff threshold relative to scale
  std::optional<stop_rules> rules;
};

namespace detail {

inline double polyline_hausdorff(const std::vector<complex_t>& a, const std::vector<complex_t>& b) {
  auto one = [](const std::vector<complex_t>& x, const std::vector<complex_t>& y) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); i += std::max<std::size_t>(1, x.size() / 64)) {
      double best = std::numeric_limits<double>::max();
      for (std::size_t j = 0; j + 1 < y.size(); ++j) best = std::min(best, segment_distance(x[i], y[j], y[j + 1]));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one(a, b), one(b, a));
}

/// |Re int sqrt(q)| from the pole `from` to z along a straight path, bent
/// around singular points if needed.
inline double level_from(const quadratic_differential& q, complex_t from, complex_t z) {
  const double s = q.scale();
  for (int attempt = 0; attempt < 12; ++attempt) {
    std::vector<complex_t> path{from};
    if (attempt > 0) {
      const complex_t mid = 0.5 * (from + z);
      const complex_t off = std::polar(0.07 * s * attempt, 1.3 * attempt);
      path.push_back(mid + off);
    }
    path.push_back(z);
    try {
      return std::abs(period_integral(q, path).real());
    } catch (const input_error&) {
    }
  }
  throw numerical_error("could not find a regular path to evaluate the level", z);
}

inline bool arcs_cross(const trajectory_arc& a, const trajectory_arc& b) {
  // skip the segments touching anchors: they meet there by construction
  const auto& x = a.samples;
  const auto& y = b.samples;
  double xl = 1e300, xh = -1e300, yl = 1e300, yh = -1e300, xl2 = 1e300, xh2 = -1e300, yl2 = 1e300, yh2 = -1e300;
  for (auto p : x) { xl = std::min(xl, p.real()); xh = std::max(xh, p.real()); yl = std::min(yl, p.imag()); yh = std::max(yh, p.imag()); }
  for (auto p : y) { xl2 = std::min(xl2, p.real()); xh2 = std::max(xh2, p.real()); yl2 = std::min(yl2, p.imag()); yh2 = std::max(yh2, p.imag()); }
  if (xh < xl2 || xh2 < xl || yh < yl2 || yh2 < yl) return false;
  for (std::size_t i = 1; i + 2 < x.size(); ++i)
    for (std::size_t j = 1; j + 2 < y.size(); ++j)
      if (segments_intersect(x[i], x[i + 1], y[j], y[j + 1])) return true;
  return false;
}

}  // namespace detail

/// Traces every star at the poles and at the zeros on the zero level of the
/// Green function, merges duplicate arcs, classifies the zeros and builds
/// the components.
inline minimal_set extract_minimal_set(const quadratic_differential& q, const std::vector<complex_t>& e0,
                                       const extract_options& opt = {}) {
  const stop_rules rules = opt.rules ? *opt.rules : stop_rules::defaults(q);
  const auto& fs = q.factors();
  const double s = q.scale();
  for (const auto& p : e0)
    if (q.singular_index(p, 1e-9 * s) < 0 || fs[q.singular_index(p, 1e-9 * s)].exponent != -1)
      throw input_error("E0 point is not a simple pole of q");
  const int nf = static_cast<int>(fs.size());
  int ref = -1;
  for (int k = 0; k < nf; ++k)
    if (fs[k].exponent < 0) { ref = k; break; }
  if (ref < 0) throw input_error("q has no poles");

  std::vector<bool> on_set(nf, false);
  for (int k = 0; k < nf; ++k) {
    if (fs[k].exponent < 0) on_set[k] = true;
    else on_set[k] = detail::level_from(q, fs[ref].point, fs[k].point) < opt.level_tolerance;
  }
  std::vector<trajectory_arc> arcs;
  for (int pass = 0; pass < 2; ++pass)
    for (int k = 0; k < nf; ++k) {
      if (!on_set[k] || (pass == 0) != (fs[k].exponent < 0)) continue;
      for (auto& arc : trace_star(q, k, rules)) {
        if (arc.end.kind == anchor_kind::open) throw numerical_error("unbounded trajectory — solution rejected", arc.end.point);
        if (!on_set[arc.end.index]) throw numerical_error("invalid trajectory topology: arc ends off the set", arc.end.point);
        if (arc.end.index == arc.start.index) throw numerical_error("invalid trajectory topology: loop on the set", arc.end.point);
        bool dup = false;
        for (const auto& o : arcs) {
          const bool same_ends = (o.start.index == arc.start.index && o.end.index == arc.end.index) ||
                                 (o.start.index == arc.end.index && o.end.index == arc.start.index);
          if (same_ends && detail::polyline_hausdorff(o.samples, arc.samples) < opt.dedupe_fraction * s) {
            dup = true;
            break;
          }
        }
        if (!dup) arcs.push_back(std::move(arc));
      }
    }

  minimal_set set;
  std::vector<int> node_of(nf, -1);
  for (int pass = 0; pass < 2; ++pass)
    for (int k = 0; k < nf; ++k) {
      if (!on_set[k] || (pass == 0) != (fs[k].exponent < 0)) continue;
      node_of[k] = static_cast<int>(set.nodes.size());
      set.nodes.push_back({fs[k].point, pass == 0 ? node_kind::e0 : node_kind::e1, 0});
    }
  for (int k = 0; k < nf; ++k)
    if (!on_set[k]) {
      if (fs[k].exponent % 2) throw numerical_error("invalid trajectory topology: odd zero off the set", fs[k].point);
      set.e2.emplace_back(fs[k].point, fs[k].exponent / 2);
    }
  for (const auto& a : arcs) {
    set.arc_nodes.emplace_back(node_of[a.start.index], node_of[a.end.index]);
    ++set.nodes[node_of[a.start.index]].index;
    ++set.nodes[node_of[a.end.index]].index;
  }
  for (int k = 0; k < nf; ++k) {
    if (!on_set[k]) continue;
    const int expect = fs[k].exponent + 2;
    if (set.nodes[node_of[k]].index != expect)
      throw numerical_error("invalid trajectory topology: wrong number of arcs at a node", fs[k].point);
  }
  for (std::size_t i = 0; i < arcs.size(); ++i)
    for (std::size_t j = i + 1; j < arcs.size(); ++j)
      if (detail::arcs_cross(arcs[i], arcs[j])) throw numerical_error("invalid trajectory topology");
  set.arcs = std::move(arcs);
  set.components = connected_components(static_cast<int>(set.nodes.size()), set.arc_nodes);
  for (const auto& comp : set.components) {
    int n0 = 0;
    for (int v : comp) n0 += set.nodes[v].kind == node_kind::e0;
    if (n0 < 2) throw numerical_error("invalid trajectory topology: component with fewer than two branch points");
  }
  return set;
}

// ---------------------------------------------------------------------------
// General solver

struct solve_spec {
  connectivity_constraint constraint;
  /// Optional seeds, used for candidates with matching counts.
  std::vector<complex_t> seeds_e1, seeds_e2;
  double tolerance = 1e-11;     // on the max period residual
  int max_iterations = 100;
  int max_starts = 24;
  unsigned rng_seed = 20240607u;
  int capacity_panels = 48;     // per arc, for ranking candidates
  /// Restricts the search to these topology encodings when non-empty.
  std::vector<std::string> topologies;
  int max_candidates = 64;
};

struct candidate_report {
  std::string encoding;
  bool converged = false;
  bool realized = false;        // traced set has this topology
  double residual = std::numeric_limits<double>::infinity();
  double capacity = std::numeric_limits<double>::quiet_NaN();
  int starts = 0;
  std::string failure;
};

struct solve_certificate {
  double period_residual = 0.0;    // max |Re int sqrt(q)| over arcs
  double shooting_mismatch = 0.0;  // max end mismatch over arcs
  double newton_residual = 0.0;
};

struct solve_result {
  quadratic_differential q;
  minimal_set set;
  std::string topology;
  double capacity = 0.0;
  std::vector<candidate_report> candidates;
  solve_certificate certificate;
};

namespace detail {

struct residual_system {
  std::vector<complex_t> e0;                 // active points
  std::vector<std::pair<int, int>> edges;    // indices into e0 ++ unknowns
  int n_e1 = 0, n_e2 = 0;

  quadratic_differential build(const std::vector<complex_t>& x) const {
    std::vector<std::pair<complex_t, int>> zeros;
    for (int i = 0; i < n_e1; ++i) zeros.emplace_back(x[i], 1);
    for (int i = 0; i < n_e2; ++i) zeros.emplace_back(x[n_e1 + i], 2);
    return {e0, zeros};
  }
  complex_t point(const std::vector<complex_t>& x, int k) const {
    return k < static_cast<int>(e0.size()) ? e0[k] : x[k - e0.size()];
  }
  std::vector<complex_t> periods(const std::vector<complex_t>& x) const {
    const auto q = build(x);
    if (q.factors().size() != e0.size() + x.size()) throw input_error("unknown zeros collided");
    std::vector<complex_t> out;
    for (const auto& [a, b] : edges) out.push_back(period_integral(q, {point(x, a), point(x, b)}));
    return out;
  }
};

/// Spanning tree (Prim) over a point set, as index pairs.
inline std::vector<std::pair<int, int>> spanning_tree(const std::vector<complex_t>& p, const std::vector<int>& ids) {
  std::vector<std::pair<int, int>> out;
  if (ids.size() < 2) return out;
  std::vector<bool> in(ids.size(), false);
  in[0] = true;
  for (std::size_t step = 1; step < ids.size(); ++step) {
    double best = std::numeric_limits<double>::max();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (in[i])
        for (std::size_t j = 0; j < ids.size(); ++j)
          if (!in[j] && std::abs(p[ids[i]] - p[ids[j]]) < best) {
            best = std::abs(p[ids[i]] - p[ids[j]]);
            bi = i;
            bj = j;
          }
    in[bj] = true;
    out.emplace_back(ids[bi], ids[bj]);
  }
  return out;
}

/// Roots of the second derivative of prod (z - p): k - 2 points inside the
/// hull of the block, a natural first guess for its bifurcation points.
inline std::vector<complex_t> block_seeds(const std::vector<complex_t>& pts) {
  if (pts.size() < 3) return {};
  std::vector<complex_t> poly{1.0};
  for (const auto& z : pts) {
    std::vector<complex_t> next(poly.size() + 1, 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      next[k + 1] += poly[k];
      next[k] -= z * poly[k];
    }
    poly = std::move(next);
  }
  std::vector<complex_t> d2(poly.size() - 2);
  for (std::size_t k = 2; k < poly.size(); ++k) d2[k - 2] = poly[k] * static_cast<double>(k * (k - 1));
  auto r = polynomial_roots(d2);
  // separate coincident seeds
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(r[i] - r[j]) < 1e-6 * point_scale(pts)) r[i] += 1e-2 * point_scale(pts) * std::polar(1.0, 0.7 + i);
  return r;
}

struct lm_outcome {
  std::vector<complex_t> x;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
};

inline lm_outcome levenberg_marquardt(const residual_system& sys, std::vector<complex_t> x, double tol, int max_it,
                                      double scale) {
  lm_outcome out;
  const int n = static_cast<int>(x.size());
  auto eval = [&](const std::vector<complex_t>& y, std::vector<complex_t>& per) -> bool {
    try {
      per = sys.periods(y);
    } catch (const std::exception&) {
      return false;
    }
    for (const auto& v : per)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  };
  std::vector<complex_t> F;
  if (!eval(x, F)) return out;
  const int m = static_cast<int>(F.size());
  auto norm_of = [](const std::vector<complex_t>& v) {
    double s = 0.0;
    for (const auto& c : v) s += c.real() * c.real();
    return std::sqrt(s);
  };
  auto maxabs = [](const std::vector<complex_t>& v) {
    double s = 0.0;
    for (const auto& c : v) s = std::max(s, std::abs(c.real()));
    return s;
  };
  double lambda = 1e-3;
  double cur = norm_of(F);
  for (int it = 0; it < max_it; ++it) {
    if (maxabs(F) < tol) break;
    Eigen::MatrixXd J(m, 2 * n);
    const double h = 1e-7 * scale;
    bool ok = true;
    for (int k = 0; k < n && ok; ++k) {
      std::vector<complex_t> xp = x, xm = x, Fp, Fm;
      xp[k] += h;
      xm[k] -= h;
      if (!eval(xp, Fp) || !eval(xm, Fm)) { ok = false; break; }
      for (int r = 0; r < m; ++r) {
        // the integral is holomorphic in the moving zero; align branches
        if (std::abs(Fp[r] - F[r]) > std::abs(Fp[r] + F[r])) Fp[r] = -Fp[r];
        if (std::abs(Fm[r] - F[r]) > std::abs(Fm[r] + F[r])) Fm[r] = -Fm[r];
        const complex_t d = (Fp[r] - Fm[r]) / (2.0 * h);
        J(r, 2 * k) = d.real();
        J(r, 2 * k + 1) = -d.imag();
      }
    }
    if (!ok) break;
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i) r(i) = F[i].real();
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      Eigen::MatrixXd A = JtJ;
      for (int i = 0; i < 2 * n; ++i) A(i, i) += lambda * (JtJ(i, i) + 1e-12);
      Eigen::VectorXd step = -A.ldlt().solve(g);
      if (!step.allFinite()) { lambda *= 10; continue; }
      std::vector<complex_t> y = x;
      double longest = 0.0;
      for (int k = 0; k < n; ++k) longest = std::max(longest, std::hypot(step(2 * k), step(2 * k + 1)));
      const double clamp = longest > 0.2 * scale ? 0.2 * scale / longest : 1.0;
      for (int k = 0; k < n; ++k) y[k] += clamp * complex_t(step(2 * k), step(2 * k + 1));
      std::vector<complex_t> Fy;
      if (eval(y, Fy) && norm_of(Fy) < cur) {
        x = std::move(y);
        F = std::move(Fy);
        cur = norm_of(F);
        lambda = std::max(lambda / 5, 1e-12);
        accepted = true;
      } else {
        lambda *= 6;
      }
    }
    if (!accepted) break;
  }
  out.x = x;
  out.residual = maxabs(F);
  out.converged = out.residual < tol;
  return out;
}

/// Partition of the E0 points realized by a traced set, as sorted blocks of
/// indices into `e0`.
inline std::vector<std::vector<int>> realized_partition(const minimal_set& set, const std::vector<complex_t>& e0,
                                                       const std::vector<int>& ids) {
  std::vector<std::vector<int>> out;
  for (const auto& comp : set.components) {
    std::vector<int> b;
    for (int v : comp)
      if (set.nodes[v].kind == node_kind::e0)
        for (std::size_t i = 0; i < e0.size(); ++i)
          if (std::abs(set.nodes[v].point - e0[i]) < 1e-9 * (1.0 + std::abs(e0[i]))) b.push_back(ids[i]);
    std::sort(b.begin(), b.end());
    out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Solves every candidate topology and returns the traced set of smallest
/// discretized capacity.
inline solve_result solve_general(const solve_spec& spec) {
  const auto all = spec.constraint.all_points();
  if (all.size() < 2) throw input_error("at least two branch points are required");
  auto candidates = enumerate_connectivity(spec.constraint);
  if (!spec.topologies.empty()) {
    std::vector<candidate_topology> kept;
    for (const auto& c : candidates)
      if (std::find(spec.topologies.begin(), spec.topologies.end(), c.encoding) != spec.topologies.end())
        kept.push_back(c);
    if (kept.size() != spec.topologies.size()) throw input_error("requested topology is not admissible");
    candidates = std::move(kept);
  }
  if (candidates.empty()) throw input_error("no admissible connectivity");
  if (static_cast<int>(candidates.size()) > spec.max_candidates)
    throw input_error("too many candidate topologies (" + std::to_string(candidates.size()) +
                      "); restrict them with a topology list");
  const double scale = point_scale(all);
  std::mt19937 rng(spec.rng_seed);

  struct found {
    solve_result result;
    double residual;
  };
  std::map<std::string, found> realized;
  std::vector<candidate_report> reports;

  for (const auto& cand : candidates) {
    candidate_report rep;
    rep.encoding = cand.encoding;
    if (realized.count(cand.encoding)) {
      rep.converged = rep.realized = true;
      rep.residual = realized[cand.encoding].residual;
      reports.push_back(rep);
      continue;
    }
    // active points and the map back to flattened indices
    std::vector<int> ids;
    for (const auto& b : cand.blocks) ids.insert(ids.end(), b.begin(), b.end());
    std::sort(ids.begin(), ids.end());
    std::vector<complex_t> e0;
    for (int i : ids) e0.push_back(all[i]);
    auto local = [&](int flat) { return static_cast<int>(std::find(ids.begin(), ids.end(), flat) - ids.begin()); };

    // seeds
    std::vector<complex_t> base_e1, base_e2;
    std::vector<int> e1_block;
    for (std::size_t b = 0; b < cand.blocks.size(); ++b) {
      std::vector<complex_t> pts;
      for (int i : cand.blocks[b]) pts.push_back(all[i]);
      for (const auto& s : detail::block_seeds(pts)) {
        base_e1.push_back(s);
        e1_block.push_back(static_cast<int>(b));
      }
    }
    // inter-block tree on closest pairs; E2 seeds at the midpoints
    std::vector<std::pair<int, int>> inter;
    {
      std::vector<bool> joined(cand.blocks.size(), false);
      joined[0] = true;
      for (std::size_t step = 1; step < cand.blocks.size(); ++step) {
        double best = std::numeric_limits<double>::max();
        int bi = 0, bj = 0, bb = 0;
        for (std::size_t x = 0; x < cand.blocks.size(); ++x)
          for (std::size_t y = 0; y < cand.blocks.size(); ++y) {
            if (!joined[x] || joined[y]) continue;
            for (int i : cand.blocks[x])
              for (int j : cand.blocks[y])
                if (std::abs(all[i] - all[j]) < best) {
                  best = std::abs(all[i] - all[j]);
                  bi = i;
                  bj = j;
                  bb = static_cast<int>(y);
                }
          }
        joined[bb] = true;
        inter.emplace_back(bi, bj);
        base_e2.push_back(0.5 * (all[bi] + all[bj]));
      }
    }
    if (static_cast<int>(spec.seeds_e1.size()) == cand.e1_count && !spec.seeds_e1.empty()) base_e1 = spec.seeds_e1;
    if (static_cast<int>(spec.seeds_e2.size()) == cand.e2_count && !spec.seeds_e2.empty()) base_e2 = spec.seeds_e2;

    for (int start = 0; start < std::max(1, spec.max_starts); ++start) {
      ++rep.starts;
      std::vector<complex_t> e1 = base_e1, e2 = base_e2;
      if (start > 0) {
        std::normal_distribution<double> nd(0.0, 0.08 * scale * std::min(4.0, 1.0 + 0.25 * start));
        for (auto& z : e1) z += complex_t(nd(rng), nd(rng));
        for (auto& z : e2) z += complex_t(nd(rng), nd(rng));
      }
      // residual paths: per block a spanning tree over its points and its
      // bifurcation seeds, plus the inter-block edges
      detail::residual_system sys;
      sys.e0 = e0;
      sys.n_e1 = static_cast<int>(e1.size());
      sys.n_e2 = static_cast<int>(e2.size());
      std::vector<complex_t> x = e1;
      x.insert(x.end(), e2.begin(), e2.end());
      std::vector<complex_t> pts = e0;
      pts.insert(pts.end(), x.begin(), x.end());
      for (std::size_t b = 0; b < cand.blocks.size(); ++b) {
        std::vector<int> members;
        for (int i : cand.blocks[b]) members.push_back(local(i));
        for (std::size_t k = 0; k < e1.size(); ++k)
          if (e1_block[k] == static_cast<int>(b)) members.push_back(static_cast<int>(e0.size() + k));
        for (const auto& e : detail::spanning_tree(pts, members)) sys.edges.push_back(e);
      }
      for (const auto& [i, j] : inter) sys.edges.emplace_back(local(i), local(j));

      detail::lm_outcome lm;
      if (x.empty()) {
        lm.x = x;
        try {
          double worst = 0.0;
          for (const auto& v : sys.periods(x)) worst = std::max(worst, std::abs(v.real()));
          lm.residual = worst;
          lm.converged = worst < spec.tolerance;
        } catch (const std::exception& e) {
          rep.failure = e.what();
        }
      } else {
        lm = detail::levenberg_marquardt(sys, x, spec.tolerance, spec.max_iterations, scale);
      }
      rep.residual = std::min(rep.residual, lm.residual);
      if (!lm.converged) continue;
      rep.converged = true;
      solve_result res;
      try {
        res.q = sys.build(lm.x);
        res.set = extract_minimal_set(res.q, e0);
      } catch (const std::exception& e) {
        rep.failure = e.what();
        continue;
      }
      if (!cand.inactive.empty()) {
        // omitted branch points must lie in the extremal domain
        const auto eq = equilibrium(res.set.arcs, spec.capacity_panels);
        bool outside = true;
        for (int i : cand.inactive)
          if (!(green_eval(eq, all[i]) > 1e-8)) outside = false;
        if (!outside) {
          rep.failure = "inactive branch point lies on the minimal set";
          continue;
        }
      }
      const auto part = detail::realized_partition(res.set, e0, ids);
      std::vector<std::vector<int>> want = cand.blocks;
      for (auto& b : want) std::sort(b.begin(), b.end());
      std::sort(want.begin(), want.end());
      const std::string enc = encode_topology(part, cand.inactive);
      // a solution may realize another admissible topology; keep it for that one
      bool admissible = false;
      for (const auto& c2 : candidates)
        if (c2.encoding == enc) admissible = true;
      if (admissible && !realized.count(enc)) {
        res.topology = enc;
        res.certificate.newton_residual = lm.residual;
        realized.emplace(enc, found{std::move(res), lm.residual});
      }
      if (part == want) {
        rep.realized = true;
        break;
      }
    }
    if (realized.count(cand.encoding)) {
      rep.realized = true;
      rep.residual = realized[cand.encoding].residual;
    }
    reports.push_back(rep);
  }

  if (realized.empty()) {
    std::ostringstream os;
    os << "no candidate converged:";
    for (const auto& r : reports) os << " " << r.encoding << " residual " << r.residual << ";";
    throw numerical_error(os.str());
  }
  // rank by discretized capacity
  const found* best = nullptr;
  double best_cap = 0.0;
  for (auto& [enc, f] : realized) {
    f.result.capacity = equilibrium(f.result.set.arcs, spec.capacity_panels).capacity.value;
    for (auto& r : reports)
      if (r.encoding == enc) r.capacity = f.result.capacity;
    const double cap = f.result.capacity;
    if (!best || cap < best_cap * (1 - 1e-8) ||
        (std::abs(cap - best_cap) <= 1e-8 * best_cap &&
         (f.residual < best->residual || (f.residual == best->residual && enc < best->result.topology)))) {
      best = &f;
      best_cap = cap;
    }
  }
  solve_result out = best->result;
  out.candidates = reports;
  for (const auto& a : out.set.arcs) {
    out.certificate.period_residual = std::max(out.certificate.period_residual, std::abs(a.period.real()));
    out.certificate.shooting_mismatch = std::max(out.certificate.shooting_mismatch, a.end_mismatch);
  }
  return out;
}

}  // namespace mincap
