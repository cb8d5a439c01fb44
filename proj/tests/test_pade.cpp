#include <gtest/gtest.h>

#include <cmath>

#include "mincap/pade.hpp"
#include "mincap/problems.hpp"
#include "mincap/solver.hpp"

using namespace mincap;

namespace {

laurent_series<complex_t> rational_series(const std::vector<complex_t>& pts, const std::vector<complex_t>& res, int N) {
  // sum r / (z - p) = sum_k (sum r p^(k-1)) w^k
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

minimal_set segment_set() {
  const quadratic_differential q({-1.0, 1.0}, {});
  return extract_minimal_set(q, {-1.0, 1.0});
}

}  // namespace

TEST(Pade, ZeroOrderIsTruncation) {
  const auto s = expand_at_infinity(problems::f5(), 4);
  const auto a = compute_pade(s, 0, 20);
  ASSERT_EQ(a.denominator.size(), 1u);
  EXPECT_EQ(to_complex(a.denominator[0]), complex_t(1.0));
  EXPECT_NEAR(std::abs(to_complex(a.numerator[0]) - s[0]), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(to_complex(a.numerator[1]) - s[1]), 0.0, 1e-14);
}

TEST(Pade, GeometricSeriesIsReproduced) {
  std::vector<complex_t> c(30, 1.0);
  c[0] = 0.0;
  const laurent_series<complex_t> s(0, 29, c);
  for (int n = 1; n <= 8; ++n) {
    const auto a = compute_pade(s, n, 30);
    EXPECT_EQ(a.denominator_degree, 1) << n;
    const auto q = a.denominator_values();
    EXPECT_NEAR(std::abs(q[a.w_shift] - 1.0), 0.0, 1e-20);
    EXPECT_NEAR(std::abs(q[a.w_shift + 1] + 1.0), 0.0, 1e-20);
    const auto p = poles(a);
    ASSERT_EQ(p.finite.size(), 1u);
    EXPECT_NEAR(std::abs(p.finite[0].point - 1.0), 0.0, 1e-14);
  }
}

TEST(Pade, OrderConditionBySubstitution) {
  const int n = 4;
  const auto a = compute_pade(problems::f1(), n, 50);
  EXPECT_LT(a.order_residual, 1e-12);
  precision_scope scope(50);
  const auto s = expand_at_infinity<mp_complex>(problems::f1(), 2 * n + 2);
  for (int k = 0; k <= 2 * n + 1; ++k) {
    mp_complex acc(0);
    for (int j = 0; j <= std::min(k, n); ++j) acc += s[k - j] * a.denominator[j];
    if (k <= n + 1) acc -= a.numerator[k];
    EXPECT_LT(static_cast<double>(abs(acc)), 1e-12) << k;
  }
}

TEST(Pade, OddFunctionHitsBlocks) {
  // f1 is odd in w, so every other approximant collapses onto its neighbour
  const auto a = compute_pade(problems::f1(), 3, 30);
  EXPECT_EQ(a.denominator_degree, 2);
  EXPECT_EQ(a.w_shift, 1);
  EXPECT_LT(a.order_residual, 1e-25);
}

TEST(Pade, SegmentPolesAreRealAndInside) {
  const auto a = compute_pade(problems::f1(), 10, 30);
  const auto p = poles(a);
  ASSERT_EQ(p.finite.size(), 10u);
  for (const auto& x : p.finite) {
    EXPECT_EQ(x.multiplicity, 1);
    EXPECT_LT(std::abs(x.point.imag()), 1e-12);
    EXPECT_LT(std::abs(x.point.real()), 1.0);
  }
  EXPECT_EQ(p.origin_order, 1);
}

TEST(Pade, SegmentNearFractionIsOne) {
  const auto p = poles(compute_pade(problems::f1(), 10, 30)).flattened();
  const auto rep = pole_metrics(p, segment_set(), 0.05, {});
  EXPECT_EQ(rep.near_fraction, 1.0);
  EXPECT_TRUE(rep.spurious.empty());
  EXPECT_EQ(rep.classes.size(), p.size());
}

TEST(Pade, DiscrepancyShrinksWithDegree) {
  const auto set = segment_set();
  const auto eq = equilibrium(set.arcs, 200);
  const double coarse = pole_metrics(poles(compute_pade(problems::f1(), 4, 30)).flattened(), set, 0.05, {}, &eq).discrepancy;
  const double fine = pole_metrics(poles(compute_pade(problems::f1(), 20, 60)).flattened(), set, 0.05, {}, &eq).discrepancy;
  EXPECT_LT(fine, coarse);
}

TEST(Pade, RationalFunctionIsExact) {
  const std::vector<complex_t> pts{{0.5, 0.2}, {-1.0, 0.7}, {0.3, -1.1}, {1.4, 0.0}, {-0.6, -0.4}};
  const std::vector<complex_t> res{1.0, {0.5, 0.5}, -0.7, {0.2, -1.0}, 1.3};
  const auto a = compute_pade(rational_series(pts, res, 40), 8, 40);
  EXPECT_EQ(a.denominator_degree, 5);
  const auto p = poles(a);
  ASSERT_EQ(p.finite.size(), 5u);
  for (const auto& x : p.finite) {
    double best = 1e300;
    for (auto z : pts) best = std::min(best, std::abs(z - x.point));
    EXPECT_LT(best, 1e-8);
  }
  const auto rep = pole_metrics(p.flattened(), segment_set(), 1e-6, pts);
  for (const auto& x : p.finite)
    if (distance_to_set(segment_set(), x.point) > 1e-6) EXPECT_TRUE(rep.spurious.empty());
}

TEST(Pade, ScalingMovesPolesInversely) {
  const double lambda = 2.0;
  std::vector<complex_t> first, second;
  for (auto z : problems::seven_point_first()) first.push_back(z / lambda);
  for (auto z : problems::seven_point_second()) second.push_back(z / lambda);
  const auto scaled = sum({root_product(first, 4), root_product(second, 3)});
  const auto a = poles(compute_pade(problems::f5(), 8, 40));
  const auto b = poles(compute_pade(scaled, 8, 40));
  ASSERT_EQ(a.finite.size(), b.finite.size());
  for (const auto& x : a.finite) {
    double best = 1e300;
    for (const auto& y : b.finite) best = std::min(best, std::abs(y.point - x.point / lambda));
    EXPECT_LT(best, 1e-8 * std::abs(x.point));
  }
}

TEST(Pade, MorePrecisionNeverHurts) {
  double prev = 1.0;
  for (unsigned digits : {30u, 60u, 120u}) {
    const double r = compute_pade(problems::f5(), 10, digits).order_residual;
    EXPECT_LE(r, prev) << digits;
    prev = r;
  }
}

TEST(Pade, InputErrors) {
  const auto s = expand_at_infinity(problems::f1(), 6);
  EXPECT_THROW(compute_pade(s, 3, 30), input_error);
  EXPECT_THROW(compute_pade(s, 1, 10), input_error);
  EXPECT_THROW(compute_pade(s, -1, 30), input_error);
  const laurent_series<complex_t> grows(-1, 8, std::vector<complex_t>(10, 1.0));
  EXPECT_THROW(compute_pade(grows, 2, 30), input_error);
  EXPECT_THROW(pole_metrics({0.0}, segment_set(), 0.0, {}), input_error);
}

TEST(Pade, DefaultDigitsGrowWithDegree) {
  EXPECT_EQ(default_pade_digits(4), 16u);
  EXPECT_EQ(default_pade_digits(25), 120u);
  EXPECT_GT(default_pade_digits(62), 120u);
}

TEST(Pade, LowPrecisionIsReportedNotHidden) {
  EXPECT_THROW(compute_pade(problems::f5(), 25, 16), precision_error);
  const auto a = compute_pade(problems::f5(), 25, 120);
  EXPECT_EQ(a.denominator_degree, 25);
  EXPECT_LT(a.order_residual, 1e-100);
}
