#pragma once

// Rational quadratic differentials q(z) dz^2 that are monic at infinity
// (q(z) z^2 -> 1), their period integrals and critical trajectories.

#include <algorithm>
#include <array>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "quadrature.hpp"

namespace mincap {

/// Factor (z - point)^exponent; exponent -1 for poles, m >= 1 for zeros.
struct q_factor {
  complex_t point;
  int exponent;
};

class quadratic_differential {
 public:
  quadratic_differential() = default;

  /// Poles are simple. Coincident pole/zero pairs cancel, coincident zeros
  /// merge; both at 1e-9 x scale. Throws "normalization violated" unless
  /// the zero multiplicities sum to (#poles - 2).
  quadratic_differential(const std::vector<complex_t>& poles,
                         const std::vector<std::pair<complex_t, int>>& zeros) {
    assemble(poles, zeros);
    int num = 0, den = 0;
    for (const auto& f : factors_) (f.exponent < 0 ? den : num) += std::abs(f.exponent);
    if (num + 2 != den) throw input_error("normalization violated");
  }

  /// Arbitrary product of factors without the monic constraint (local models).
  static quadratic_differential from_factors(std::vector<q_factor> factors) {
    quadratic_differential q;
    std::vector<complex_t> poles;
    std::vector<std::pair<complex_t, int>> zeros;
    for (const auto& f : factors) {
      if (f.exponent == -1) poles.push_back(f.point);
      else if (f.exponent > 0) zeros.emplace_back(f.point, f.exponent);
      else throw input_error("factor exponents must be -1 or positive");
    }
    q.assemble(poles, zeros);
    return q;
  }

  /// Poles first, then zeros.
  const std::vector<q_factor>& factors() const { return factors_; }
  std::vector<complex_t> poles() const {
    std::vector<complex_t> out;
    for (const auto& f : factors_)
      if (f.exponent < 0) out.push_back(f.point);
    return out;
  }
  std::vector<std::pair<complex_t, int>> zeros() const {
    std::vector<std::pair<complex_t, int>> out;
    for (const auto& f : factors_)
      if (f.exponent > 0) out.emplace_back(f.point, f.exponent);
    return out;
  }
  double scale() const { return scale_; }

  complex_t operator()(complex_t z) const {
    complex_t v = 1.0;
    for (const auto& f : factors_) v *= ipow(z - f.point, f.exponent);
    return v;
  }

  /// Index of the singular point within `tol` of z, or -1.
  int singular_index(complex_t z, double tol) const {
    int best = -1;
    double bd = tol;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      const double d = std::abs(z - factors_[i].point);
      if (d <= bd) { bd = d; best = static_cast<int>(i); }
    }
    return best;
  }

  static complex_t ipow(complex_t b, int e) {
    if (e < 0) return 1.0 / ipow(b, -e);
    complex_t r = 1.0;
    while (e) {
      if (e & 1) r *= b;
      b *= b;
      e >>= 1;
    }
    return r;
  }

 private:
  void assemble(const std::vector<complex_t>& poles, const std::vector<std::pair<complex_t, int>>& zeros) {
    std::vector<complex_t> all = poles;
    for (const auto& z : zeros) {
      if (z.second < 1) throw input_error("zero multiplicity must be >= 1");
      all.push_back(z.first);
    }
    scale_ = all.size() >= 2 ? point_scale(all) : 1.0;
    const double tol = 1e-9 * scale_;
    std::vector<q_factor> zs;
    for (const auto& z : zeros) {
      bool merged = false;
      for (auto& f : zs)
        if (std::abs(f.point - z.first) <= tol) { f.exponent += z.second; merged = true; break; }
      if (!merged) zs.push_back({z.first, z.second});
    }
    std::vector<q_factor> ps;
    for (const auto& p : poles) {
      for (const auto& o : ps)
        if (std::abs(o.point - p) <= tol) throw input_error("poles of q must be simple");
      bool cancelled = false;
      for (auto& f : zs)
        if (f.exponent > 0 && std::abs(f.point - p) <= tol) { --f.exponent; cancelled = true; break; }
      if (!cancelled) ps.push_back({p, -1});
    }
    factors_ = ps;
    for (const auto& f : zs)
      if (f.exponent > 0) factors_.push_back(f);
  }

  std::vector<q_factor> factors_;
  double scale_ = 1.0;
};

/// E0 entries carry the bifurcation index i >= 1, E1 entries i >= 3, E2
/// entries the critical-point order j >= 1. Exponent i - 2 for E0 and E1,
/// 2j for E2.
inline quadratic_differential build_q(const std::vector<std::pair<complex_t, int>>& e0,
                                      const std::vector<std::pair<complex_t, int>>& e1,
                                      const std::vector<std::pair<complex_t, int>>& e2) {
  std::vector<complex_t> poles;
  std::vector<std::pair<complex_t, int>> zeros;
  for (const auto& [p, i] : e0) {
    if (i < 1) throw input_error("E0 bifurcation index must be >= 1");
    if (i == 1) poles.push_back(p);
    else if (i > 2) zeros.emplace_back(p, i - 2);
  }
  for (const auto& [p, i] : e1) {
    if (i < 3) throw input_error("E1 bifurcation index must be >= 3");
    zeros.emplace_back(p, i - 2);
  }
  for (const auto& [p, j] : e2) {
    if (j < 1) throw input_error("E2 order must be >= 1");
    zeros.emplace_back(p, 2 * j);
  }
  return {poles, zeros};
}

struct normalization_report {
  double residual = 0.0;
  double radius = 0.0;
  bool passed = false;
};

/// |q(R) R^2 - 1| at R = 1e6 (1 + max|a|) over the poles a.
inline normalization_report validate_normalization(const quadratic_differential& q) {
  double amax = 0.0;
  for (const auto& p : q.poles()) amax = std::max(amax, std::abs(p));
  normalization_report r;
  r.radius = 1e6 * (1.0 + amax);
  // q(z) z^2 - 1 = c/z + O(z^-2); combining two radii removes the c/z term
  auto excess = [&](complex_t z) { return q(z) * z * z - 1.0; };
  const complex_t R = r.radius;
  r.residual = std::abs(2.0 * excess(2.0 * R) - excess(R));
  r.passed = r.residual < 1e-6;
  return r;
}

// ---------------------------------------------------------------------------
// Period integrals

struct path_integral {
  complex_t value;
  /// sqrt(q) at the path ends, in the branch used for the integral; zero or
  /// infinite at singular ends.
  complex_t start_root;
  complex_t end_root;
};

namespace detail {

struct piece {
  complex_t a, b;
  int sa = -1, sb = -1;  // singular factor index at the ends
};

/// sqrt(q) on a straight piece at parameter t in [0, 1], continuous in t.
/// Endpoint factors are written as powers of sqrt(b-a) sqrt(t) so that the
/// singular parts can be folded into the quadrature weight.
inline complex_t piece_root(const quadratic_differential& q, const piece& p, double t, bool with_ends) {
  const complex_t d = p.b - p.a;
  const complex_t z = p.a + t * d;
  const complex_t zm = p.a + 0.5 * d;
  complex_t v = 1.0;
  const auto& fs = q.factors();
  for (int k = 0; k < static_cast<int>(fs.size()); ++k) {
    const int e = fs[k].exponent;
    if (k == p.sa) {
      if (with_ends) v *= quadratic_differential::ipow(std::sqrt(d) * std::sqrt(t), e);
      continue;
    }
    if (k == p.sb) {
      if (with_ends) v *= quadratic_differential::ipow(std::sqrt(-d) * std::sqrt(1.0 - t), e);
      continue;
    }
    if (e % 2 == 0) {
      v *= quadratic_differential::ipow(z - fs[k].point, e / 2);
    } else {
      const complex_t c = fs[k].point;
      const complex_t s = std::sqrt(zm - c) * std::sqrt((z - c) / (zm - c));
      v *= quadratic_differential::ipow(s, e);
    }
  }
  return v;
}

inline complex_t piece_integral(const quadratic_differential& q, const piece& p, int n) {
  const auto& rule = gauss_legendre(n);
  const complex_t d = p.b - p.a;
  const int ea = p.sa >= 0 ? q.factors()[p.sa].exponent : 0;
  const int eb = p.sb >= 0 ? q.factors()[p.sb].exponent : 0;
  complex_t ends = d;
  if (p.sa >= 0) ends *= quadratic_differential::ipow(std::sqrt(d), ea);
  if (p.sb >= 0) ends *= quadratic_differential::ipow(std::sqrt(-d), eb);
  // t = (1 - cos th)/2: dt = sin(th/2) cos(th/2) dth, sqrt(t) = sin(th/2)
  complex_t acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double th = 0.5 * pi * (rule.nodes[i] + 1.0);
    const double s = std::sin(0.5 * th), c = std::cos(0.5 * th);
    const double t = s * s;
    double w = std::pow(s, ea + 1) * std::pow(c, eb + 1);
    acc += rule.weights[i] * w * piece_root(q, p, t, false);
  }
  return acc * ends * (0.5 * pi);
}

inline void split_piece(const quadratic_differential& q, const piece& p, int depth, std::vector<piece>& out) {
  const double len = std::abs(p.b - p.a);
  const auto& fs = q.factors();
  bool near = false;
  for (int k = 0; k < static_cast<int>(fs.size()); ++k) {
    if (k == p.sa || k == p.sb) continue;
    const double dist = segment_distance(fs[k].point, p.a, p.b);
    if (dist <= 1e-13 * q.scale())
      throw input_error("path passes through an interior singularity");
    if (dist < 0.6 * len) near = true;
  }
  if (!near || depth > 60) {
    out.push_back(p);
    return;
  }
  const complex_t m = 0.5 * (p.a + p.b);
  split_piece(q, {p.a, m, p.sa, -1}, depth + 1, out);
  split_piece(q, {m, p.b, -1, p.sb}, depth + 1, out);
}

}  // namespace detail

/// Integral of sqrt(q) dz along a polyline with the branch continued along
/// the path. Only the first and last vertices may be singular points of q.
inline path_integral integrate_sqrt_q(const quadratic_differential& q, const std::vector<complex_t>& path,
                                      int nodes = 40) {
  if (path.size() < 2) throw input_error("path needs at least two vertices");
  const double snap = 1e-12 * q.scale();
  std::vector<detail::piece> pieces;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (path[i] == path[i + 1]) continue;
    detail::piece p{path[i], path[i + 1], q.singular_index(path[i], snap), q.singular_index(path[i + 1], snap)};
    if ((i > 0 && p.sa >= 0) || (i + 2 < path.size() && p.sb >= 0))
      throw input_error("path passes through an interior singularity");
    if (p.sa >= 0) p.a = q.factors()[p.sa].point;
    if (p.sb >= 0) p.b = q.factors()[p.sb].point;
    detail::split_piece(q, p, 0, pieces);
  }
  if (pieces.empty()) return {};
  path_integral out;
  complex_t total = 0.0, prev_end = 0.0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    double sign = 1.0;
    const complex_t start = detail::piece_root(q, p, 0.0, true);
    if (i > 0 && std::abs(prev_end - start) > std::abs(prev_end + start)) sign = -1.0;
    if (i == 0) out.start_root = start;
    total += sign * detail::piece_integral(q, p, nodes);
    prev_end = sign * detail::piece_root(q, p, 1.0, true);
  }
  out.value = total;
  out.end_root = prev_end;
  return out;
}

inline complex_t period_integral(const quadratic_differential& q, const std::vector<complex_t>& path) {
  return integrate_sqrt_q(q, path).value;
}

// ---------------------------------------------------------------------------
// Trajectories

/// Directions of the critical trajectories leaving factor `index`, sorted
/// by angle in [0, 2 pi).
inline std::vector<double> star_angles(const quadratic_differential& q, int index) {
  const auto& fs = q.factors();
  if (index < 0 || index >= static_cast<int>(fs.size())) throw input_error("star_angles: bad index");
  const complex_t c = fs[index].point;
  double arg_a = 0.0;
  for (int k = 0; k < static_cast<int>(fs.size()); ++k)
    if (k != index) arg_a += fs[k].exponent * std::arg(c - fs[k].point);
  const int m = fs[index].exponent;
  std::vector<double> out;
  for (int k = 0; k < m + 2; ++k) {
    double a = (pi - arg_a + 2.0 * pi * k) / (m + 2);
    a = std::fmod(a, 2.0 * pi);
    if (a < 0) a += 2.0 * pi;
    out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<complex_t> star_directions(const quadratic_differential& q, int index) {
  std::vector<complex_t> out;
  for (double a : star_angles(q, index)) out.push_back(std::polar(1.0, a));
  return out;
}

enum class anchor_kind { branch_point, bifurcation, critical_point, open };

inline const char* to_string(anchor_kind k) {
  switch (k) {
    case anchor_kind::branch_point: return "branchPoint";
    case anchor_kind::bifurcation: return "bifurcation";
    case anchor_kind::critical_point: return "criticalPoint";
    default: return "open";
  }
}

struct anchor {
  anchor_kind kind = anchor_kind::open;
  int index = -1;  // factor index in q, -1 if open
  complex_t point{};
};

struct trajectory_arc {
  std::vector<complex_t> samples;
  anchor start, end;
  double imaginary_length = 0.0;
  /// Distance between the integrated end and the anchor it was snapped to.
  double end_mismatch = 0.0;
  /// Integral of sqrt(q) dz along the sample polyline.
  complex_t period{};
};

struct stop_rules {
  double max_length = 0.0;
  double anchor_radius = 0.0;
  double capture_radius = 0.0;
  double launch_offset = 0.0;
  double max_step = 0.0;
  double tolerance = 0.0;  // absolute local error per step
  /// Step cap as a fraction of the distance to the nearest singular point.
  double proximity = 0.05;
  /// Direction change per step in radians; bounds the chord error of the
  /// sampled polyline where trajectories bend.
  double max_turn = 1e-3;
  complex_t lower{}, upper{};  // bounding box corners

  static stop_rules defaults(const quadratic_differential& q) {
    const double s = q.scale();
    stop_rules r;
    r.max_length = 40.0 * s;
    r.anchor_radius = 1e-6 * s;
    r.capture_radius = 1e-4 * s;
    r.launch_offset = 1e-4 * s;
    r.max_step = 5e-4 * s;
    r.tolerance = 1e-10 * s;
    double x0 = std::numeric_limits<double>::max(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& f : q.factors()) {
      x0 = std::min(x0, f.point.real());
      x1 = std::max(x1, f.point.real());
      y0 = std::min(y0, f.point.imag());
      y1 = std::max(y1, f.point.imag());
    }
    r.lower = {x0 - 2.0 * s, y0 - 2.0 * s};
    r.upper = {x1 + 2.0 * s, y1 + 2.0 * s};
    return r;
  }
};

inline anchor_kind kind_of(int exponent) {
  if (exponent < 0) return anchor_kind::branch_point;
  return exponent % 2 ? anchor_kind::bifurcation : anchor_kind::critical_point;
}

namespace detail {

/// Unit trajectory direction i/sqrt(q) oriented along `ref`.
inline complex_t field(const quadratic_differential& q, complex_t z, complex_t ref) {
  complex_t v = complex_t(0.0, 1.0) / std::sqrt(q(z));
  v /= std::abs(v);
  if (std::real(v * std::conj(ref)) < 0.0) v = -v;
  return v;
}

}  // namespace detail

/// Integrates dz/ds = +-i/sqrt(q) at unit speed. A start within the anchor
/// radius of a singular point launches along the nearest star direction.
inline trajectory_arc trace_trajectory(const quadratic_differential& q, complex_t start, complex_t direction,
                                       const stop_rules& rules) {
  if (std::abs(direction) == 0.0) throw input_error("trace_trajectory: zero direction");
  direction /= std::abs(direction);
  const auto& fs = q.factors();
  trajectory_arc arc;
  complex_t z;
  const int start_idx = q.singular_index(start, rules.anchor_radius);
  if (start_idx >= 0) {
    const complex_t c = fs[start_idx].point;
    double best = 10.0;
    complex_t dir = direction;
    for (const auto& d : star_directions(q, start_idx)) {
      const double gap = std::abs(std::arg(d / direction));
      if (gap < best) { best = gap; dir = d; }
    }
    if (best > 0.05) throw input_error("direction is not a trajectory direction at this anchor");
    direction = dir;
    arc.start = {kind_of(fs[start_idx].exponent), start_idx, c};
    // Launch, then pull back onto the level line Re int_c^z sqrt(q) = 0.
    const complex_t nrm = complex_t(0.0, 1.0) * dir;
    z = c + rules.launch_offset * dir;
    for (int it = 0; it < 4; ++it) {
      const auto pi_ = integrate_sqrt_q(q, {c, z});
      const double deriv = std::real(pi_.end_root * nrm);
      if (deriv == 0.0) break;
      const double tau = -std::real(pi_.value) / deriv;
      if (std::abs(tau) > 0.5 * rules.launch_offset) break;
      z += tau * nrm;
      if (std::abs(tau) < 1e-16 * rules.launch_offset) break;
    }
    arc.samples = {c, z};
  } else {
    const complex_t v = detail::field(q, start, direction);
    if (std::abs(std::arg(v / direction)) > 1e-2)
      throw input_error("initial direction violates the trajectory condition");
    direction = v;
    arc.start = {anchor_kind::open, -1, start};
    z = start;
    arc.samples = {start};
  }

  // Dormand-Prince 5(4)
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  (void)c2; (void)c3; (void)c4; (void)c5;

  complex_t dir = direction;
  double length = std::abs(z - arc.samples.front());
  double h = std::min(rules.max_step, rules.proximity * rules.launch_offset);
  const double min_step = 1e-14 * q.scale();
  bool left_start = start_idx < 0;
  std::vector<double> prev_dist(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) prev_dist[k] = std::abs(z - fs[k].point);

  auto nearest = [&](complex_t p) {
    double d = std::numeric_limits<double>::max();
    for (std::size_t k = 0; k < fs.size(); ++k) d = std::min(d, std::abs(p - fs[k].point));
    return d;
  };

  // |d arg v / ds| for v = i / sqrt(q): |Im(q'/(2q) v)|
  auto curvature = [&](complex_t p, complex_t v) {
    complex_t log_derivative = 0.0;
    for (const auto& f : fs) log_derivative += static_cast<double>(f.exponent) / (p - f.point);
    return std::max(std::abs(std::imag(0.5 * log_derivative * v)), 1e-300);
  };

  for (long steps = 0;; ++steps) {
    if (steps > 2000000) throw numerical_error("trajectory step limit exceeded", z);
    h = std::min({h, rules.max_step, rules.proximity * nearest(z), rules.max_turn / curvature(z, dir)});
    if (h < min_step) throw numerical_error("step-size underflow near unresolved singularity", z);
    const complex_t k1 = detail::field(q, z, dir);
    const complex_t k2 = detail::field(q, z + h * a21 * k1, k1);
    const complex_t k3 = detail::field(q, z + h * (a31 * k1 + a32 * k2), k1);
    const complex_t k4 = detail::field(q, z + h * (a41 * k1 + a42 * k2 + a43 * k3), k1);
    const complex_t k5 = detail::field(q, z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k1);
    const complex_t k6 = detail::field(q, z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k1);
    const complex_t zn = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const complex_t k7 = detail::field(q, zn, k1);
    const double err = std::abs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
    const complex_t ratio = q(zn) / q(z);
    const bool phase_ok = std::abs(std::arg(ratio)) < 0.5 * pi;
    if (err > rules.tolerance || !phase_ok) {
      const double fac = phase_ok ? std::max(0.2, 0.9 * std::pow(rules.tolerance / err, 0.2)) : 0.5;
      h *= fac;
      if (h < min_step) {
        if (!phase_ok) throw numerical_error("refine near zero", z);
        throw numerical_error("step-size underflow near unresolved singularity", z);
      }
      continue;
    }
    // accepted
    const complex_t zold = z;
    z = zn;
    dir = k7;
    length += h;
    arc.samples.push_back(z);

    // anchors: chord passing within the anchor radius, or closest approach
    // inside the capture radius
    int hit = -1;
    double hit_dist = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      if (static_cast<int>(k) == start_idx && !left_start) {
        if (std::abs(z - fs[k].point) > 10.0 * std::max(rules.capture_radius, rules.launch_offset)) left_start = true;
        prev_dist[k] = std::abs(z - fs[k].point);
        continue;
      }
      const double dchord = segment_distance(fs[k].point, zold, z);
      const double dnow = std::abs(z - fs[k].point);
      if (dchord < rules.anchor_radius ||
          (prev_dist[k] < rules.capture_radius && dnow > prev_dist[k])) {
        if (hit < 0 || dchord < hit_dist) { hit = static_cast<int>(k); hit_dist = dchord; }
      }
      prev_dist[k] = dnow;
    }
    if (hit >= 0) {
      // drop integrated points that overshot the anchor
      const complex_t c = fs[hit].point;
      double best = std::abs(arc.samples.back() - c);
      while (arc.samples.size() > 2) {
        const double d = std::abs(arc.samples[arc.samples.size() - 2] - c);
        if (d > best) break;
        best = d;
        arc.samples.pop_back();
      }
      arc.end_mismatch = std::min(best, hit_dist);
      if (best <= rules.anchor_radius) arc.end_mismatch = 0.0;
      if (arc.end_mismatch == 0.0 || std::abs(arc.samples.back() - c) < rules.anchor_radius) arc.samples.back() = c;
      else arc.samples.push_back(c);
      arc.end = {kind_of(fs[hit].exponent), hit, c};
      break;
    }
    if (z.real() < rules.lower.real() || z.real() > rules.upper.real() || z.imag() < rules.lower.imag() ||
        z.imag() > rules.upper.imag() || length > rules.max_length) {
      arc.end = {anchor_kind::open, -1, z};
      break;
    }
    h = std::min(rules.max_step, h * std::min(5.0, std::max(0.2, 0.9 * std::pow(rules.tolerance / std::max(err, 1e-300), 0.2))));
  }
  arc.period = integrate_sqrt_q(q, arc.samples).value;
  arc.imaginary_length = std::abs(arc.period.imag());
  return arc;
}

/// Trace every star direction at factor `index`.
inline std::vector<trajectory_arc> trace_star(const quadratic_differential& q, int index, const stop_rules& rules) {
  std::vector<trajectory_arc> out;
  for (const auto& d : star_directions(q, index)) out.push_back(trace_trajectory(q, q.factors()[index].point, d, rules));
  return out;
}

}  // namespace mincap
