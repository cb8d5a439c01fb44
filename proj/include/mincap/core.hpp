#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace mincap {

using complex_t = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Bad input: malformed expressions, wrong sizes, out-of-domain arguments.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iteration did not converge or a tolerance could not be met.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what, complex_t where = {}, double residual = 0.0)
      : std::runtime_error(what), where_(where), residual_(residual) {}
  complex_t where() const noexcept { return where_; }
  double residual() const noexcept { return residual_; }

 private:
  complex_t where_;
  double residual_;
};

/// Working precision too low for the requested computation.
class precision_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

/// Distance from p to the segment [a, b].
inline double segment_distance(complex_t p, complex_t a, complex_t b) {
  const complex_t d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  double t = std::real((p - a) * std::conj(d)) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

/// Diameter-like length scale of a point set, never below 1e-300.
inline double point_scale(const std::vector<complex_t>& pts) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) s = std::max(s, std::abs(pts[i] - pts[j]));
  return std::max(s, 1e-300);
}

inline double cross(complex_t a, complex_t b) { return a.real() * b.imag() - a.imag() * b.real(); }

/// Proper or touching intersection of segments [a,b] and [c,d].
inline bool segments_intersect(complex_t a, complex_t b, complex_t c, complex_t d, double tol = 0.0) {
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  if (((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol)) &&
      ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol)))
    return true;
  return false;
}

}  // namespace mincap
