#pragma once

// The worked examples: 1/sqrt(z^2 - 1), the square, fourth and nested
// square roots over four symmetric points on the unit circle, and the sum of
// a fourth and a cube root over seven points.

#include "function_expr.hpp"

namespace mincap::problems {

/// e^{i phi}, e^{i(pi - phi)}, e^{i(pi + phi)}, e^{-i phi}.
inline std::vector<complex_t> symmetric_points(double phi) {
  if (!(phi > 0.0 && phi < 0.5 * pi)) throw input_error("phi must lie in (0, pi/2)");
  return {std::polar(1.0, phi), std::polar(1.0, pi - phi), std::polar(1.0, pi + phi), std::polar(1.0, -phi)};
}

inline std::vector<complex_t> seven_point_first() { return {{1, 3}, {-4, 2}, {-4, 1}, {0, 2}}; }
inline std::vector<complex_t> seven_point_second() { return {{2, 2}, {3, 4}, {1, 4}}; }

/// 1/sqrt(z^2 - 1) = z^{-1} (1 - z^{-2})^{-1/2}.
inline function_expr f1() { return product({monomial(-1), root_product({-1.0, 1.0}, 2, -1)}); }

/// sqrt(prod (1 - z_j / z)), equal to 1 at infinity.
inline function_expr f2(double phi) { return root_product(symmetric_points(phi), 2); }

/// Fourth root of the same product.
inline function_expr f3(double phi) { return root_product(symmetric_points(phi), 4); }

/// sqrt(sqrt(prod (1 - z_j / z)) - c), both roots positive at infinity for c = 0.
inline function_expr f4(double phi, complex_t c) {
  return fractional_power(difference({root_product(symmetric_points(phi), 2), constant(c)}), {1, 2});
}

inline function_expr f5() { return sum({root_product(seven_point_first(), 4), root_product(seven_point_second(), 3)}); }

}  // namespace mincap::problems
