#pragma once

// Truncated Laurent series in w = 1/z, stored densely.

#include <numeric>
#include <string>
#include <vector>

#include "multiprecision.hpp"

namespace mincap {

struct rational_exponent {
  long num = 1;
  long den = 1;

  rational_exponent reduced() const {
    if (den == 0) throw input_error("exponent denominator is zero");
    long g = std::gcd(num, den);
    if (g == 0) g = 1;
    long n = num / g, d = den / g;
    if (d < 0) { n = -n; d = -d; }
    return {n, d};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Coefficient k multiplies z^(-k) = w^k, for k = first() .. order().
template <class C>
class laurent_series {
 public:
  laurent_series() : first_(0), order_(0), c_(1, C(0)) {}
  laurent_series(int first, int order, std::vector<C> coeffs)
      : first_(first), order_(order), c_(std::move(coeffs)) {
    if (order < first || c_.size() != static_cast<std::size_t>(order - first + 1))
      throw input_error("laurent_series: coefficient count does not match truncation order");
  }

  static laurent_series constant(const C& v, int order) {
    std::vector<C> c(order + 1, C(0));
    c[0] = v;
    return {0, order, std::move(c)};
  }

  int first() const { return first_; }
  int order() const { return order_; }
  const std::vector<C>& coefficients() const { return c_; }

  /// Coefficient of w^k; zero below first(), an error above order().
  C operator[](int k) const {
    if (k > order_) throw input_error("coefficient beyond truncation order requested");
    if (k < first_) return C(0);
    return c_[k - first_];
  }

  /// Same series re-indexed to start at `first` (must be <= first()) and
  /// truncated to `order`.
  laurent_series reshaped(int first, int order) const {
    if (first > first_) {
      for (int k = first_; k < first; ++k)
        if (!((*this)[k] == C(0))) throw input_error("reshape would drop nonzero leading terms");
    }
    if (order > order_) throw input_error("reshape beyond truncation order");
    std::vector<C> c;
    c.reserve(order - first + 1);
    for (int k = first; k <= order; ++k) c.push_back(k < first_ ? C(0) : c_[k - first_]);
    return {first, order, std::move(c)};
  }

  friend laurent_series operator+(const laurent_series& a, const laurent_series& b) {
    return combine(a, b, false);
  }
  friend laurent_series operator-(const laurent_series& a, const laurent_series& b) {
    return combine(a, b, true);
  }
  friend laurent_series operator*(const laurent_series& a, const laurent_series& b) {
    const int first = a.first_ + b.first_;
    const int order = std::min(a.order_ + b.first_, b.order_ + a.first_);
    std::vector<C> c(order - first + 1, C(0));
    for (int i = a.first_; i <= a.order_; ++i)
      for (int j = b.first_; j <= b.order_ && i + j <= order; ++j)
        c[i + j - first] += a.c_[i - a.first_] * b.c_[j - b.first_];
    return {first, order, std::move(c)};
  }
  friend laurent_series operator*(const C& s, const laurent_series& a) {
    laurent_series r = a;
    for (auto& v : r.c_) v = s * v;
    return r;
  }

 private:
  static laurent_series combine(const laurent_series& a, const laurent_series& b, bool minus) {
    const int first = std::min(a.first_, b.first_);
    const int order = std::min(a.order_, b.order_);
    if (order < first) return constant(C(0), std::max(order, 0));
    std::vector<C> c(order - first + 1, C(0));
    for (int k = first; k <= order; ++k) c[k - first] = minus ? a[k] - b[k] : a[k] + b[k];
    return {first, order, std::move(c)};
  }

  int first_;
  int order_;
  std::vector<C> c_;
};

/// s^e for a power series with nonzero constant term. The constant term of
/// the result is the principal value of s0^e. Uses the J.C.P. Miller
/// recurrence, O(N^2).
template <class C>
laurent_series<C> series_pow(const laurent_series<C>& s, rational_exponent e) {
  using R = real_of<C>;
  e = e.reduced();
  if (s.order() < 0) throw input_error("negative truncation order");
  for (int k = s.first(); k < 0; ++k)
    if (!(s[k] == C(0))) throw input_error("non-normalizable series");
  const C s0 = s[0];
  using std::abs;
  if (abs(s0) == R(0)) throw input_error("non-normalizable series");

  const int n = s.order();
  const R ex = R(e.num) / R(e.den);
  std::vector<C> a(n + 1), r(n + 1, C(0));
  for (int k = 0; k <= n; ++k) a[k] = s[k] / s0;
  r[0] = C(1);
  for (int k = 1; k <= n; ++k) {
    C acc(0);
    for (int j = 1; j <= k; ++j) {
      const R f = ex * R(j) - R(k - j);
      acc += a[j] * r[k - j] * C(f);
    }
    r[k] = acc / C(R(k));
  }
  C lead;
  if (e.den == 1) {
    lead = C(1);
    const long m = e.num < 0 ? -e.num : e.num;
    for (long i = 0; i < m; ++i) lead = lead * s0;
    if (e.num < 0) lead = C(1) / lead;
  } else {
    lead = pow(s0, ex);
  }
  for (auto& v : r) v = v * lead;
  return {0, n, std::move(r)};
}

}  // namespace mincap
