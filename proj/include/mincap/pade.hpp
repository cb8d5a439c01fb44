#pragma once

// Diagonal-type Pade approximants [n+1/n] at infinity, in the variable
// w = 1/z, computed in multiprecision from the Laurent expansion, and the
// clustering of their poles on a computed minimal set.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "capacity.hpp"
#include "function_expr.hpp"
#include "multiprecision.hpp"
#include "polyroots.hpp"
#include "series.hpp"

namespace mincap {

struct pade_approximant {
  int n = 0;
  unsigned digits = 16;
  /// Digits the series coefficients are accurate to; rank decisions use it.
  unsigned data_digits = 16;
  /// Minimal-degree solution of the order conditions, p_0..p_{n+1} and
  /// q_0..q_n, scaled so the first nonzero q is 1.
  std::vector<mp_complex> numerator, denominator;
  /// Degrees after cancelling common powers of w and trailing zeros.
  int numerator_degree = 0, denominator_degree = 0;
  /// Power of w cancelled from both polynomials.
  int w_shift = 0;
  /// Max relative size of the coefficients of f Q - P through w^(2n+1).
  double order_residual = 0.0;

  std::vector<complex_t> numerator_values() const {
    std::vector<complex_t> v;
    for (const auto& c : numerator) v.push_back(to_complex(c));
    return v;
  }
  std::vector<complex_t> denominator_values() const {
    std::vector<complex_t> v;
    for (const auto& c : denominator) v.push_back(to_complex(c));
    return v;
  }
};

/// Digits suited to an approximant of size n: the Hankel conditioning grows
/// geometrically with n. MINCAP_DIGITS overrides.
inline unsigned default_pade_digits(int n) {
  const unsigned base = n <= 8 ? 16u : n <= 40 ? 120u : static_cast<unsigned>(3 * n);
  return default_digits(base);
}

namespace detail {

/// Rank test and null vector of a dense matrix by full-pivot elimination.
struct elimination {
  std::vector<std::vector<mp_complex>> a;
  std::vector<int> col;  // column permutation
  int rank = 0;
  mp_real leftover{0};  // largest entry left when elimination stopped early

  elimination(std::vector<std::vector<mp_complex>> m, const mp_real& tol) : a(std::move(m)) {
    const int rows = static_cast<int>(a.size());
    const int cols = rows ? static_cast<int>(a[0].size()) : 0;
    col.resize(cols);
    for (int j = 0; j < cols; ++j) col[j] = j;
    for (int k = 0; k < std::min(rows, cols); ++k) {
      int pi_ = k, pj = k;
      mp_real best(0);
      for (int i = k; i < rows; ++i)
        for (int j = k; j < cols; ++j)
          if (abs(a[i][j]) > best) {
            best = abs(a[i][j]);
            pi_ = i;
            pj = j;
          }
      if (best <= tol) {
        leftover = best;
        break;
      }
      std::swap(a[k], a[pi_]);
      if (pj != k) {
        for (auto& row : a) std::swap(row[k], row[pj]);
        std::swap(col[k], col[pj]);
      }
      for (int i = k + 1; i < rows; ++i) {
        if (a[i][k] == mp_complex(0)) continue;
        const mp_complex f = a[i][k] / a[k][k];
        for (int j = k; j < cols; ++j) a[i][j] -= f * a[k][j];
      }
      ++rank;
    }
  }

  /// Null vector with the first free column set to one.
  std::vector<mp_complex> null_vector() const {
    const int cols = static_cast<int>(col.size());
    std::vector<mp_complex> y(cols, mp_complex(0));
    y[rank] = mp_complex(1);
    for (int k = rank - 1; k >= 0; --k) {
      mp_complex s(0);
      for (int j = k + 1; j < cols; ++j) s += a[k][j] * y[j];
      y[k] = -s / a[k][k];
    }
    std::vector<mp_complex> x(cols);
    for (int j = 0; j < cols; ++j) x[col[j]] = y[j];
    return x;
  }
};

}  // namespace detail

/// Minimal-degree [n+1/n] approximant of sum c_k w^k, computed at `digits`
/// decimal digits. `data_digits` (0: same as digits) is the accuracy of the
/// coefficients and sets the rank threshold.
inline pade_approximant compute_pade(const laurent_series<mp_complex>& series, int n, unsigned digits,
                                     unsigned data_digits = 0) {
  if (n < 0) throw input_error("pade: n must be nonnegative");
  if (digits < 16) throw input_error("pade: at least 16 digits are required");
  if (series.first() < 0) throw input_error("pade: the function must be bounded at infinity");
  if (series.order() < 2 * n + 2) throw input_error("pade: insufficient series order for this n");
  precision_scope scope(digits);
  const unsigned trusted = data_digits ? std::min(digits, data_digits) : digits;
  auto tenth_power = [](unsigned d) { return bmp::pow(mp_real(10), -static_cast<int>(d)); };

  // Balance the coefficient growth: c_k rho^k has geometric mean size one.
  mp_real growth(0);
  for (int k = 1; k <= 2 * n + 2; ++k) {
    const mp_real a = abs(series[k]);
    if (a > 0) growth = std::max(growth, mp_real(bmp::pow(a, mp_real(1) / k)));
  }
  const mp_real rho = growth > 0 ? mp_real(1 / growth) : mp_real(1);
  std::vector<mp_complex> c(2 * n + 2);
  {
    mp_real r(1);
    for (int k = 0; k <= 2 * n + 1; ++k) {
      c[k] = series[k] * r;
      r *= rho;
    }
  }
  mp_real cmax(0);
  for (const auto& v : c) cmax = std::max(cmax, abs(v));
  // Pivots below `tol` count as zero; a genuine block leaves only roundoff,
  // anything between that and `tol` means the precision is insufficient.
  const mp_real tol = cmax * tenth_power(trusted / 2);
  const mp_real roundoff = cmax * tenth_power(trusted - 4);

  auto hankel = [&](int m) {
    std::vector<std::vector<mp_complex>> h(n, std::vector<mp_complex>(m + 1));
    for (int r = 0; r < n; ++r)
      for (int j = 0; j <= m; ++j) h[r][j] = c[n + 2 + r - j];
    return h;
  };
  // smallest m whose truncated system has a nontrivial null space
  int lo = 0, hi = n;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    const detail::elimination e(hankel(mid), tol);
    if (e.rank < mid + 1) hi = mid;
    else lo = mid + 1;
  }
  std::vector<mp_complex> q(n + 1, mp_complex(0));
  if (n == 0) {
    q[0] = mp_complex(1);
  } else {
    const detail::elimination e(hankel(lo), tol);
    if (e.leftover > roundoff)
      throw precision_error("pade: Hankel system is numerically singular at " + std::to_string(digits) +
                                " digits; increase the working precision",
                            {}, static_cast<double>(e.leftover / cmax));
    const auto v = e.null_vector();
    for (int j = 0; j <= lo; ++j) q[j] = v[j];
  }
  mp_real qmax(0);
  for (const auto& v : q) qmax = std::max(qmax, abs(v));
  const mp_real small = qmax * tenth_power(trusted / 2);
  int shift = 0;
  while (shift < n && abs(q[shift]) <= small) ++shift;
  const mp_complex lead = q[shift];
  for (auto& v : q) v = abs(v) <= small ? mp_complex(0) : mp_complex(v / lead);

  std::vector<mp_complex> p(n + 2, mp_complex(0));
  for (int k = 0; k <= n + 1; ++k)
    for (int j = 0; j <= std::min(k, n); ++j) p[k] += c[k - j] * q[j];

  pade_approximant out;
  out.n = n;
  out.digits = digits;
  out.data_digits = trusted;
  // order conditions on the balanced coefficients
  mp_real worst(0);
  for (int k = n + 2; k <= 2 * n + 1; ++k) {
    mp_complex s(0);
    mp_real mag(0);
    for (int j = 0; j <= n; ++j) {
      s += c[k - j] * q[j];
      mag += abs(c[k - j]) * abs(q[j]);
    }
    if (mag > 0) worst = std::max(worst, mp_real(abs(s) / mag));
  }
  out.order_residual = static_cast<double>(worst);
  if (worst > tenth_power(trusted / 2))
    throw precision_error("pade: Hankel system is numerically singular at " + std::to_string(digits) +
                              " digits; increase the working precision",
                          {}, out.order_residual);

  // undo the balancing: q_k -> q_k / rho^k
  {
    mp_real r(1);
    for (int k = 0; k <= n + 1; ++k) {
      if (k <= n) q[k] = q[k] / r;
      p[k] = p[k] / r;
      r *= rho;
    }
    const mp_complex lead_q = q[shift];
    for (auto& v : q) v = v / lead_q;
    for (auto& v : p) v = v / lead_q;
  }
  const mp_real pmax = [&] {
    mp_real m(0);
    for (const auto& v : p) m = std::max(m, abs(v));
    return m;
  }();
  out.w_shift = shift;
  out.denominator_degree = 0;
  for (int k = n; k >= 0; --k)
    if (q[k] != mp_complex(0)) {
      out.denominator_degree = k - shift;
      break;
    }
  out.numerator_degree = -1;
  for (int k = n + 1; k >= shift; --k)
    if (abs(p[k]) > pmax * tenth_power(trusted / 2)) {
      out.numerator_degree = k - shift;
      break;
    }
  out.numerator = std::move(p);
  out.denominator = std::move(q);
  return out;
}

/// Convenience overload for series known in double precision.
inline pade_approximant compute_pade(const laurent_series<complex_t>& series, int n, unsigned digits) {
  precision_scope scope(std::max(16u, digits));
  std::vector<mp_complex> c;
  for (const auto& v : series.coefficients()) c.push_back(mp_complex(v));
  return compute_pade(laurent_series<mp_complex>(series.first(), series.order(), std::move(c)), n, digits, 15);
}

/// Expands f at infinity at the working precision and builds [n+1/n].
inline pade_approximant compute_pade(const function_expr& f, int n, unsigned digits) {
  if (digits < 16) throw input_error("pade: at least 16 digits are required");
  precision_scope scope(digits);
  return compute_pade(expand_at_infinity<mp_complex>(f, 2 * n + 2), n, digits);
}

struct pade_pole {
  complex_t point;
  int multiplicity = 1;
};

/// Poles of the reduced approximant: z = 1/w over the roots of Q, grouped
/// into multiplicities, plus the pole at the origin left by deg P > deg Q.
struct pade_poles {
  std::vector<pade_pole> finite;
  int origin_order = 0;

  /// Every pole listed once per multiplicity, the origin included.
  std::vector<complex_t> flattened() const {
    std::vector<complex_t> out;
    for (const auto& p : finite)
      for (int k = 0; k < p.multiplicity; ++k) out.push_back(p.point);
    for (int k = 0; k < origin_order; ++k) out.push_back(0.0);
    return out;
  }
};

inline pade_poles poles(const pade_approximant& a) {
  pade_poles out;
  out.origin_order = std::max(0, a.numerator_degree - a.denominator_degree);
  if (a.denominator_degree < 1) return out;
  precision_scope scope(a.digits);
  std::vector<mp_complex> q(a.denominator.begin() + a.w_shift,
                            a.denominator.begin() + a.w_shift + a.denominator_degree + 1);
  const auto roots = polynomial_roots(q);
  const mp_real close = bmp::pow(mp_real(10), -static_cast<int>(a.data_digits / 4));
  std::vector<bool> used(roots.size(), false);
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (used[i]) continue;
    pade_pole p;
    mp_complex w = roots[i];
    for (std::size_t j = i + 1; j < roots.size(); ++j)
      if (!used[j] && abs(roots[j] - roots[i]) <= close * (1 + abs(roots[i]))) {
        used[j] = true;
        ++p.multiplicity;
      }
    if (abs(w) == 0) throw numerical_error("pade: denominator root at w = 0");
    p.point = to_complex(mp_complex(1) / w);
    out.finite.push_back(p);
  }
  return out;
}

enum class pole_class { near_set, systematic, spurious };

struct pole_report {
  std::vector<complex_t> poles;
  std::vector<pole_class> classes;
  double epsilon = 0.0;
  double near_fraction = 0.0;
  std::vector<complex_t> systematic, spurious;
  /// Max over probe points of |U_poles - U_equilibrium|.
  double discrepancy = 0.0;
};

inline double distance_to_set(const minimal_set& set, complex_t z) {
  double best = std::numeric_limits<double>::max();
  for (const auto& arc : set.arcs)
    for (std::size_t i = 0; i + 1 < arc.samples.size(); ++i)
      best = std::min(best, segment_distance(z, arc.samples[i], arc.samples[i + 1]));
  for (const auto& n : set.nodes) best = std::min(best, std::abs(z - n.point));
  return best;
}

/// Classifies each pole as near the set, systematic (near a declared polar
/// singularity of f) or spurious, and compares the counting measure of the
/// near poles with the equilibrium measure through their potentials on
/// circles around the set.
inline pole_report pole_metrics(const std::vector<complex_t>& poles_z, const minimal_set& set, double epsilon,
                                const std::vector<complex_t>& polar_singularities,
                                const equilibrium_result* eq = nullptr) {
  if (!(epsilon > 0.0)) throw input_error("pole_metrics: epsilon must be positive");
  pole_report rep;
  rep.poles = poles_z;
  rep.epsilon = epsilon;
  std::vector<complex_t> near;
  for (const auto& p : poles_z) {
    if (distance_to_set(set, p) <= epsilon) {
      rep.classes.push_back(pole_class::near_set);
      near.push_back(p);
      continue;
    }
    bool systematic = false;
    for (const auto& s : polar_singularities) systematic = systematic || std::abs(p - s) <= epsilon;
    rep.classes.push_back(systematic ? pole_class::systematic : pole_class::spurious);
    (systematic ? rep.systematic : rep.spurious).push_back(p);
  }
  rep.near_fraction = poles_z.empty() ? 0.0 : static_cast<double>(near.size()) / poles_z.size();
  if (near.empty() || set.arcs.empty()) return rep;
  equilibrium_result local;
  if (!eq) local = equilibrium(set.arcs, 100);
  const auto& measure = eq ? eq->measure : local.measure;
  std::vector<complex_t> pts;
  for (const auto& n : set.nodes) pts.push_back(n.point);
  complex_t center = 0.0;
  for (auto z : pts) center += z;
  center /= static_cast<double>(pts.size());
  double radius = 0.0;
  for (const auto& arc : set.arcs)
    for (auto z : arc.samples) radius = std::max(radius, std::abs(z - center));
  for (double factor : {1.5, 2.0, 3.0})
    for (int k = 0; k < 64; ++k) {
      const complex_t z = center + std::polar(factor * radius, 2.0 * pi * k / 64);
      double un = 0.0, um = 0.0;
      for (auto p : near) un += std::log(std::abs(z - p)) / near.size();
      for (std::size_t i = 0; i < measure.panels.size(); ++i)
        if (measure.weights[i] > 0.0) um += measure.weights[i] * detail::mean_log_panel(z, measure.panels[i]);
      rep.discrepancy = std::max(rep.discrepancy, std::abs(un - um));
    }
  return rep;
}

}  // namespace mincap
