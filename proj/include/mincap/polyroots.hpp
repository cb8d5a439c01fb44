#pragma once

// Simultaneous polynomial root finding (Aberth-Ehrlich) with Newton polish.

#include <algorithm>
#include <vector>

#include "multiprecision.hpp"

namespace mincap {

template <class C>
struct horner_result {
  C value, derivative;
};

/// p(z) and p'(z); coefficients in ascending order.
template <class C>
horner_result<C> horner(const std::vector<C>& a, const C& z) {
  C p(0), dp(0);
  for (std::size_t k = a.size(); k-- > 0;) {
    dp = dp * z + p;
    p = p * z + a[k];
  }
  return {p, dp};
}

/// Backward-error style residual |p(z)| / sum |a_k| |z|^k.
template <class C>
real_of<C> relative_residual(const std::vector<C>& a, const C& z) {
  using R = real_of<C>;
  using std::abs;
  R scale(0), zp(1);
  const R az = abs(z);
  for (const auto& c : a) {
    scale += abs(c) * zp;
    zp *= az;
  }
  const R v = abs(horner(a, z).value);
  return scale == R(0) ? v : v / scale;
}

struct root_options {
  int max_iterations = 500;
  /// Accepted backward error as a multiple of the working epsilon.
  double residual_factor = 1e4;
};

/// All roots of sum a_k z^k, a_n != 0. Exact zero roots are split off first.
template <class C>
std::vector<C> polynomial_roots(std::vector<C> a, root_options opt = {}) {
  using R = real_of<C>;
  using std::abs;
  using std::cos;
  using std::pow;
  using std::sin;
  while (!a.empty() && abs(a.back()) == R(0)) a.pop_back();
  if (a.size() < 2) throw input_error("polynomial_roots: degree must be at least 1");

  std::vector<C> roots;
  std::size_t lead_zero = 0;
  while (lead_zero < a.size() && abs(a[lead_zero]) == R(0)) ++lead_zero;
  for (std::size_t i = 0; i < lead_zero; ++i) roots.push_back(C(0));
  a.erase(a.begin(), a.begin() + static_cast<long>(lead_zero));
  const int n = static_cast<int>(a.size()) - 1;
  if (n == 0) return roots;

  const R eps = complex_traits<C>::epsilon();
  // Start on a circle whose radius is the geometric mean root modulus.
  const R radius = pow(abs(a[0]) / abs(a[n]), R(1) / R(n));
  std::vector<C> z(n);
  for (int k = 0; k < n; ++k) {
    const R th = R(2) * R(pi) * R(k) / R(n) + R(0.4);
    z[k] = C(radius * cos(th), radius * sin(th));
  }

  std::vector<bool> done(n, false);
  const R tol = eps * R(16);
  for (int it = 0; it < opt.max_iterations; ++it) {
    bool all = true;
    for (int i = 0; i < n; ++i) {
      if (done[i]) continue;
      const auto h = horner(a, z[i]);
      if (abs(h.value) == R(0)) { done[i] = true; continue; }
      const C ratio = h.value / h.derivative;
      C sum(0);
      for (int j = 0; j < n; ++j)
        if (j != i) sum += C(1) / (z[i] - z[j]);
      const C w = ratio / (C(1) - ratio * sum);
      z[i] -= w;
      if (abs(w) <= tol * std::max(R(1), abs(z[i]))) done[i] = true;
      else all = false;
    }
    if (all) break;
  }
  // Newton polish; harmless for simple roots, bounded for clusters.
  for (auto& r : z) {
    for (int k = 0; k < 3; ++k) {
      const auto h = horner(a, r);
      if (abs(h.derivative) == R(0)) break;
      const C step = h.value / h.derivative;
      const C cand = r - step;
      if (relative_residual(a, cand) <= relative_residual(a, r)) r = cand;
      else break;
    }
  }
  R worst(0);
  for (const auto& r : z) worst = std::max(worst, relative_residual(a, r));
  if (worst > eps * R(opt.residual_factor) * R(n)) {
    throw numerical_error("root iteration did not converge (backward error " +
                              std::to_string(static_cast<double>(worst)) + ")",
                          {}, static_cast<double>(worst));
  }
  roots.insert(roots.end(), z.begin(), z.end());
  return roots;
}

}  // namespace mincap
