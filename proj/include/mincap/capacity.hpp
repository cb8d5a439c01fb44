#pragma once

// Equilibrium measures and logarithmic capacity of finite unions of arcs.
//
// Arcs are cut into panels at Chebyshev-clustered arclength positions and the
// measure is taken piecewise constant (per unit length) on each panel, so the
// energy matrix is a Galerkin discretization of the log kernel: each entry is
// minus the mean of log|x - y| over a pair of panels. Panels follow the arc
// polylines, so no geometry is lost to chords.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "minimal_set.hpp"
#include "quadrature.hpp"

namespace mincap {

struct panel {
  std::vector<complex_t> path;  // polyline, at least two points
  double length = 0.0;
  int arc = 0;
  complex_t center;       // point at half arclength
  complex_t normal;       // unit normal at center
  std::vector<complex_t> g4, g8;  // arclength Gauss points
};

struct discrete_measure {
  std::vector<complex_t> nodes;   // panel centers
  std::vector<double> weights;    // panel masses, sum 1
  std::vector<panel> panels;
};

struct capacity_estimate {
  double value = 0.0;
  double energy = 0.0;
  int discretization_size = 0;
  double refinement_delta = 0.0;
};

struct equilibrium_result {
  discrete_measure measure;
  capacity_estimate capacity;
};

namespace detail {

inline std::vector<double> arclengths(const std::vector<complex_t>& p) {
  std::vector<double> s(p.size(), 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) s[i] = s[i - 1] + std::abs(p[i] - p[i - 1]);
  return s;
}

/// Point at arclength t and the index of the segment containing it.
inline std::pair<complex_t, std::size_t> point_at(const std::vector<complex_t>& p, const std::vector<double>& s,
                                                  double t) {
  if (t <= 0.0) return {p.front(), 0};
  if (t >= s.back()) return {p.back(), p.size() - 2};
  const std::size_t k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), t) - s.begin()) - 1;
  const double seg = s[k + 1] - s[k];
  const double u = seg > 0 ? (t - s[k]) / seg : 0.0;
  return {p[k] + u * (p[k + 1] - p[k]), k};
}

inline std::vector<complex_t> sub_polyline(const std::vector<complex_t>& p, const std::vector<double>& s, double t0,
                                           double t1) {
  std::vector<complex_t> out{point_at(p, s, t0).first};
  for (std::size_t i = 0; i < p.size(); ++i)
    if (s[i] > t0 && s[i] < t1) out.push_back(p[i]);
  out.push_back(point_at(p, s, t1).first);
  return out;
}

inline void finish_panel(panel& pn) {
  const auto s = arclengths(pn.path);
  pn.length = s.back();
  auto [c, k] = point_at(pn.path, s, 0.5 * pn.length);
  pn.center = c;
  complex_t t = pn.path[k + 1] - pn.path[k];
  if (std::abs(t) == 0.0) t = pn.path.back() - pn.path.front();
  pn.normal = complex_t(0.0, 1.0) * t / std::abs(t);
  for (int n : {4, 8}) {
    const auto& r = gauss_legendre(n);
    auto& out = n == 4 ? pn.g4 : pn.g8;
    out.clear();
    for (int i = 0; i < n; ++i) out.push_back(point_at(pn.path, s, 0.5 * pn.length * (r.nodes[i] + 1.0)).first);
  }
}

/// (1/L) int_0^L log |z - (a + s (b-a)/L)| ds, in closed form.
inline double mean_log_segment(complex_t z, complex_t a, complex_t b) {
  const complex_t d = b - a;
  const double len = std::abs(d);
  if (std::abs(z - 0.5 * (a + b)) > 32.0 * len) {
    // the closed form cancels badly far away; the integrand is smooth there
    static const quadrature_rule& r = gauss_legendre(8);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.nodes.size(); ++k)
      acc += r.weights[k] * std::log(std::abs(z - (a + 0.5 * (1.0 + r.nodes[k]) * d)));
    return 0.5 * acc;
  }
  const complex_t u = (z - a) * std::conj(d) / len;
  const double p = u.real(), h = std::abs(u.imag());
  auto F = [h](double v) {
    if (h == 0.0) return v == 0.0 ? 0.0 : v * std::log(std::abs(v)) - v;
    return 0.5 * v * std::log(v * v + h * h) - v + h * std::atan(v / h);
  };
  return (F(len - p) - F(-p)) / len;
}

inline double mean_log_panel(complex_t z, const panel& pn) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < pn.path.size(); ++i) {
    const double l = std::abs(pn.path[i + 1] - pn.path[i]);
    if (l > 0.0) acc += l * mean_log_segment(z, pn.path[i], pn.path[i + 1]);
  }
  return acc / pn.length;
}

/// -(1/(la lb)) int_A int_B log|x - y|, for distinct straight segments.
inline double segment_pair_energy(complex_t a0, complex_t a1, complex_t b0, complex_t b1) {
  const complex_t da = a1 - a0;
  const double la = std::abs(da);
  // parameter on A closest to B
  double best_t = 0.0, best_d = std::numeric_limits<double>::max();
  auto consider = [&](double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double d = segment_distance(a0 + t * da, b0, b1);
    if (d < best_d) { best_d = d; best_t = t; }
  };
  consider(0.0);
  consider(1.0);
  for (complex_t p : {b0, b1}) consider(std::real((p - a0) * std::conj(da)) / (la * la));
  std::vector<double> cuts{0.0, 1.0, best_t};
  const int levels = best_d > 0.0 ? std::clamp(static_cast<int>(std::ceil(std::log2(la / best_d))) + 2, 0, 40) : 40;
  for (int k = 1; k <= levels; ++k) {
    const double delta = std::ldexp(1.0, -k);
    if (best_t - delta > 0.0) cuts.push_back(best_t - delta);
    if (best_t + delta < 1.0) cuts.push_back(best_t + delta);
  }
  std::sort(cuts.begin(), cuts.end());
  const auto& r = gauss_legendre(8);
  double acc = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double t0 = cuts[c], t1 = cuts[c + 1];
    if (t1 <= t0) continue;
    for (int i = 0; i < 8; ++i) {
      const double t = t0 + 0.5 * (t1 - t0) * (r.nodes[i] + 1.0);
      acc += 0.5 * (t1 - t0) * r.weights[i] * mean_log_segment(a0 + t * da, b0, b1);
    }
  }
  return -acc;
}

/// Galerkin entry for a pair of panels (possibly the same panel).
inline double panel_pair_energy(const panel& A, const panel& B, bool same) {
  const double lmax = std::max(A.length, B.length);
  if (!same) {
    const double gap = std::abs(A.center - B.center) - 0.5 * (A.length + B.length);
    if (gap > 1.5 * lmax) {
      const bool coarse = gap > 8.0 * lmax;
      const auto& r = gauss_legendre(coarse ? 4 : 8);
      const auto& ga = coarse ? A.g4 : A.g8;
      const auto& gb = coarse ? B.g4 : B.g8;
      double acc = 0.0;
      for (std::size_t i = 0; i < ga.size(); ++i)
        for (std::size_t j = 0; j < gb.size(); ++j)
          acc += r.weights[i] * r.weights[j] * std::log(std::abs(ga[i] - gb[j]));
      return -0.25 * acc;
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < A.path.size(); ++i) {
    const double la = std::abs(A.path[i + 1] - A.path[i]);
    if (la == 0.0) continue;
    for (std::size_t j = 0; j + 1 < B.path.size(); ++j) {
      const double lb = std::abs(B.path[j + 1] - B.path[j]);
      if (lb == 0.0) continue;
      const double e = (same && i == j) ? -std::log(la) + 1.5
                                        : segment_pair_energy(A.path[i], A.path[i + 1], B.path[j], B.path[j + 1]);
      acc += la * lb * e;
    }
  }
  return acc / (A.length * B.length);
}

}  // namespace detail

/// Cut each polyline into M panels. A polyline whose ends coincide is treated
/// as closed and cut uniformly; open ones are clustered towards both ends.
inline std::vector<panel> panelize(const std::vector<std::vector<complex_t>>& lines, int M) {
  if (M < 1) throw input_error("panelize: M must be positive");
  std::vector<panel> out;
  for (std::size_t a = 0; a < lines.size(); ++a) {
    const auto& p = lines[a];
    if (p.size() < 2) throw input_error("arc polyline needs at least two points");
    const auto s = detail::arclengths(p);
    const double S = s.back();
    if (!(S > 0.0)) throw input_error("arc polyline has zero length");
    const bool closed = p.size() > 3 && std::abs(p.front() - p.back()) < 1e-12 * S;
    for (int k = 0; k < M; ++k) {
      double t0, t1;
      if (closed) {
        t0 = S * k / M;
        t1 = S * (k + 1) / M;
      } else {
        t0 = 0.5 * S * (1.0 - std::cos(pi * k / M));
        t1 = 0.5 * S * (1.0 - std::cos(pi * (k + 1) / M));
      }
      panel pn;
      pn.path = detail::sub_polyline(p, s, t0, t1);
      pn.arc = static_cast<int>(a);
      detail::finish_panel(pn);
      out.push_back(std::move(pn));
    }
  }
  return out;
}

/// Minimizes the discrete energy over probability weights on the panels.
inline equilibrium_result equilibrium_from_panels(std::vector<panel> panels) {
  const int n = static_cast<int>(panels.size());
  if (n == 0) throw input_error("equilibrium: no panels");
  // Shift the kernel by log(diameter) so it is positive definite on
  // probability measures; the shift only moves the energy.
  std::vector<complex_t> ends;
  for (const auto& p : panels) {
    ends.push_back(p.path.front());
    ends.push_back(p.path.back());
  }
  const double shift = std::log(2.0 * point_scale(ends));
  Eigen::MatrixXd K(n, n);
  for (int i = 0; i < n; ++i) {
    K(i, i) = detail::panel_pair_energy(panels[i], panels[i], true) + shift;
    for (int j = i + 1; j < n; ++j) {
      const double e = 0.5 * (detail::panel_pair_energy(panels[i], panels[j], false) +
                              detail::panel_pair_energy(panels[j], panels[i], false));
      K(i, j) = K(j, i) = e + shift;
    }
  }
  std::vector<int> active(n);
  std::iota(active.begin(), active.end(), 0);
  Eigen::VectorXd w;
  double energy = 0.0;
  for (int round = 0;; ++round) {
    const int m = static_cast<int>(active.size());
    Eigen::MatrixXd Ka(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) Ka(i, j) = K(active[i], active[j]);
    Eigen::VectorXd x;
    Eigen::LLT<Eigen::MatrixXd> llt(Ka);
    if (llt.info() == Eigen::Success) {
      x = llt.solve(Eigen::VectorXd::Ones(m));
    } else {
      x = Ka.partialPivLu().solve(Eigen::VectorXd::Ones(m));
    }
    const double total = x.sum();
    if (!x.allFinite() || !(std::abs(total) > 0.0))
      throw numerical_error("singular quadrature matrix: increase M or jitter the nodes");
    w = x / total;
    energy = 1.0 / total - shift;
    if (w.minCoeff() >= 0.0 || round > 50) break;
    std::vector<int> keep;
    for (int i = 0; i < m; ++i)
      if (w(i) > 0.0) keep.push_back(active[i]);
    if (keep.empty()) throw numerical_error("equilibrium active set emptied");
    active = std::move(keep);
  }
  equilibrium_result res;
  res.measure.weights.assign(n, 0.0);
  for (std::size_t i = 0; i < active.size(); ++i) res.measure.weights[active[i]] = std::max(0.0, w(i));
  double sum = 0.0;
  for (double v : res.measure.weights) sum += v;
  for (double& v : res.measure.weights) v /= sum;
  for (const auto& p : panels) res.measure.nodes.push_back(p.center);
  res.measure.panels = std::move(panels);
  res.capacity.energy = energy;
  res.capacity.value = std::exp(-energy);
  res.capacity.discretization_size = n;
  return res;
}

inline equilibrium_result equilibrium(const std::vector<std::vector<complex_t>>& lines, int M) {
  if (lines.empty()) throw input_error("equilibrium: no arcs");
  if (M < 8) throw input_error("equilibrium: M must be at least 8");
  return equilibrium_from_panels(panelize(lines, M));
}

inline std::vector<std::vector<complex_t>> polylines(const std::vector<trajectory_arc>& arcs) {
  std::vector<std::vector<complex_t>> out;
  for (const auto& a : arcs) out.push_back(a.samples);
  return out;
}

inline equilibrium_result equilibrium(const std::vector<trajectory_arc>& arcs, int M) {
  return equilibrium(polylines(arcs), M);
}

/// Capacity at M and M/2; refinement_delta is the change between them.
inline equilibrium_result equilibrium_refined(const std::vector<std::vector<complex_t>>& lines, int M) {
  auto fine = equilibrium(lines, M);
  const auto coarse = equilibrium(lines, std::max(8, M / 2));
  fine.capacity.refinement_delta = std::abs(fine.capacity.value - coarse.capacity.value);
  return fine;
}

/// Green function with pole at infinity: sum w log|z - t| + energy.
inline double green_eval(const equilibrium_result& eq, complex_t z) {
  const auto& m = eq.measure;
  double scale = 0.0;
  for (const auto& p : m.panels) scale = std::max(scale, p.length);
  for (const auto& node : m.nodes)
    if (std::abs(z - node) <= 1e-14 * std::max(1.0, scale)) throw input_error("green_eval: point coincides with a node");
  double g = eq.capacity.energy;
  const auto& rule = gauss_legendre(8);
  for (std::size_t i = 0; i < m.panels.size(); ++i) {
    if (!(m.weights[i] > 0.0)) continue;
    const auto& pn = m.panels[i];
    if (std::abs(z - pn.center) > 3.0 * pn.length) {
      double acc = 0.0;
      for (std::size_t k = 0; k < pn.g8.size(); ++k) acc += rule.weights[k] * std::log(std::abs(z - pn.g8[k]));
      g += m.weights[i] * 0.5 * acc;
    } else {
      g += m.weights[i] * detail::mean_log_panel(z, pn);
    }
  }
  if (g < 0.0 && g > -1e-10) g = 0.0;
  return g;
}

struct s_residual_options {
  double offset = 0.0;           // largest offset; 0 selects 1e-4 x scale
  double end_fraction = 0.125;   // panels this close (in index) to arc ends are skipped
};

struct s_residual_report {
  double value = 0.0;
  int samples = 0;
  int skipped = 0;
  std::vector<std::string> warnings;
};

/// Max over interior panels of |g(z + h n) - g(z - h n)| / h, extrapolated
/// to h -> 0.
inline s_residual_report s_residual_detail(const minimal_set& set, const equilibrium_result& eq,
                                           s_residual_options opt = {}) {
  const double h_max = opt.offset > 0.0 ? opt.offset : 1e-4 * set.scale();
  const auto& panels = eq.measure.panels;
  s_residual_report rep;
  std::vector<int> per_arc(set.arcs.size(), 0);
  for (const auto& p : panels) ++per_arc.at(p.arc);
  std::vector<int> seen(set.arcs.size(), 0);
  for (const auto& p : panels) {
    const int k = seen[p.arc]++;
    const int M = per_arc[p.arc];
    const int skip = static_cast<int>(std::ceil(opt.end_fraction * M));
    if (k < skip || k >= M - skip) continue;
    // sample at the segment midpoint nearest the center: polyline vertices
    // carry a kink term of order (sample step x curvature)
    complex_t at = p.center, normal = p.normal;
    double nearest = std::numeric_limits<double>::max(), segment = p.length;
    for (std::size_t i = 0; i + 1 < p.path.size(); ++i) {
      const complex_t mid = 0.5 * (p.path[i] + p.path[i + 1]), t = p.path[i + 1] - p.path[i];
      if (std::abs(t) == 0.0 || std::abs(mid - p.center) >= nearest) continue;
      nearest = std::abs(mid - p.center);
      at = mid;
      segment = std::abs(t);
      normal = complex_t(0.0, 1.0) * t / std::abs(t);
    }
    // the offset must stay local to the segment on short, finely sampled arcs
    const double h = std::min(h_max, 0.05 * segment);
    const complex_t zp = at + h * normal, zm = at - h * normal;
    bool collide = false;
    for (const auto& o : panels) {
      if (o.arc == p.arc) continue;
      if (std::abs(o.center - p.center) > o.length + 4.0 * h) continue;
      for (std::size_t i = 0; i + 1 < o.path.size() && !collide; ++i)
        collide = segment_distance(zp, o.path[i], o.path[i + 1]) < 2.0 * h ||
                  segment_distance(zm, o.path[i], o.path[i + 1]) < 2.0 * h;
    }
    if (collide) {
      ++rep.skipped;
      rep.warnings.push_back("offset point near another arc skipped");
      continue;
    }
    // On an S-curve (g(z + t n) - g(z - t n)) / t = c t + O(t^2); one
    // Richardson step removes the c t term and leaves the derivative jump.
    auto quotient = [&](double t) { return (green_eval(eq, at + t * normal) - green_eval(eq, at - t * normal)) / t; };
    rep.value = std::max(rep.value, std::abs(2.0 * quotient(0.5 * h) - quotient(h)));
    ++rep.samples;
  }
  return rep;
}

inline double s_residual(const minimal_set& set, const equilibrium_result& eq, s_residual_options opt = {}) {
  return s_residual_detail(set, eq, opt).value;
}

/// Normal displacement amplitude * b(t), t in [0, 1] the relative arclength,
/// b(t) = sum_k modes[k] sin((k + 1) pi t) normalized to max |b| = 1.
struct bump_profile {
  double amplitude = 0.0;
  std::vector<double> modes{1.0};

  double operator()(double t) const {
    return amplitude == 0.0 ? 0.0 : amplitude * raw(t) / peak();
  }

 private:
  double raw(double t) const {
    double v = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) v += modes[k] * std::sin((k + 1.0) * pi * t);
    return v;
  }
  double peak() const {
    double m = 0.0;
    for (int i = 0; i <= 2000; ++i) m = std::max(m, std::abs(raw(i / 2000.0)));
    if (m == 0.0) throw input_error("bump profile is identically zero");
    return m;
  }
};

inline bool polylines_cross(const std::vector<complex_t>& a, const std::vector<complex_t>& b, bool same) {
  for (std::size_t i = 0; i + 1 < a.size(); ++i)
    for (std::size_t j = same ? i + 2 : 0; j + 1 < b.size(); ++j)
      if (segments_intersect(a[i], a[i + 1], b[j], b[j + 1])) return true;
  return false;
}

/// Arc `arc` displaced along its normals by the bump; ends stay fixed.
inline std::vector<complex_t> bumped_arc(const std::vector<complex_t>& p, const bump_profile& bump) {
  const auto s = detail::arclengths(p);
  const double S = s.back();
  std::vector<complex_t> out = p;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    complex_t t = p[i + 1] - p[i - 1];
    t /= std::abs(t);
    out[i] = p[i] + bump(s[i] / S) * complex_t(0.0, 1.0) * t;
  }
  return out;
}

/// cap(perturbed) - cap(original) for a normal bump on one arc.
inline double local_min_probe(const minimal_set& set, int arc, const bump_profile& bump, int M = 200) {
  if (arc < 0 || arc >= static_cast<int>(set.arcs.size())) throw input_error("local_min_probe: bad arc index");
  auto lines = polylines(set.arcs);
  const double base = equilibrium(lines, M).capacity.value;
  lines[arc] = bumped_arc(lines[arc], bump);
  if (polylines_cross(lines[arc], lines[arc], true)) throw numerical_error("perturbed arc self-intersects");
  for (std::size_t o = 0; o < lines.size(); ++o) {
    if (static_cast<int>(o) == arc) continue;
    // skip the end segments, which legitimately share anchors
    std::vector<complex_t> inner(lines[arc].begin() + 1, lines[arc].end() - 1);
    if (inner.size() >= 2 && polylines_cross(inner, lines[o], false)) throw numerical_error("perturbed arcs intersect");
  }
  return equilibrium(lines, M).capacity.value - base;
}

struct check_item {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double tolerance = 0.0;
};

struct geometry_report {
  std::vector<check_item> items;
  bool passed() const {
    for (const auto& i : items)
      if (!i.passed) return false;
    return true;
  }
};

/// Andrew's monotone chain; counter-clockwise, no repeated end point.
inline std::vector<complex_t> convex_hull(std::vector<complex_t> p) {
  std::sort(p.begin(), p.end(), [](complex_t a, complex_t b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  });
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return p;
  std::vector<complex_t> h(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0) --k;
    h[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 1] - h[k - 2], p[i] - h[k - 2]) <= 0) --k;
    h[k++] = p[i];
  }
  h.resize(k - 1);
  return h;
}

/// Distance from z to the hull, zero inside.
inline double hull_excess(const std::vector<complex_t>& hull, complex_t z) {
  if (hull.empty()) return std::numeric_limits<double>::infinity();
  if (hull.size() == 1) return std::abs(z - hull[0]);
  if (hull.size() == 2) return segment_distance(z, hull[0], hull[1]);
  bool inside = true;
  double best = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const complex_t a = hull[i], b = hull[(i + 1) % hull.size()];
    if (cross(b - a, z - a) < 0) inside = false;
    best = std::min(best, segment_distance(z, a, b));
  }
  return inside ? 0.0 : best;
}

/// Hull containment of all arc samples and the diameter bounds on the
/// capacity of every component. The capacity check allows the M vs M/2
/// refinement change as discretization tolerance.
/// `whole`, when given, is a refined equilibrium of the full set; it is
/// reused for a single-component set.
inline geometry_report geometry_checks(const minimal_set& set, int M = 100, const equilibrium_result* whole = nullptr) {
  geometry_report rep;
  const auto hull = convex_hull(set.e0_points());
  double worst = 0.0;
  for (const auto& a : set.arcs)
    for (const auto& z : a.samples) worst = std::max(worst, hull_excess(hull, z));
  rep.items.push_back({"arcs inside convex hull of E0", worst <= 1e-9, worst, 0.0, 1e-9, 0.0});
  for (std::size_t c = 0; c < set.components.size(); ++c) {
    const auto ids = set.component_arcs(c);
    if (ids.empty()) continue;
    std::vector<std::vector<complex_t>> lines;
    std::vector<complex_t> pts;
    for (int a : ids) {
      lines.push_back(set.arcs[a].samples);
      pts.insert(pts.end(), set.arcs[a].samples.begin(), set.arcs[a].samples.end());
    }
    const double diam = point_scale(pts);
    const auto eq = whole && set.components.size() == 1 ? *whole : equilibrium_refined(lines, M);
    const double cap = eq.capacity.value, tol = eq.capacity.refinement_delta;
    rep.items.push_back({"component " + std::to_string(c) + " diameter bounds on capacity",
                         cap + tol >= diam / 4 && cap - tol <= diam / 2, cap, diam / 4, diam / 2, tol});
  }
  return rep;
}

}  // namespace mincap
