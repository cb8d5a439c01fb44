#include <gtest/gtest.h>

#include "mincap/qdiff.hpp"

using namespace mincap;

namespace {

quadratic_differential q_f1() { return build_q({{-1.0, 1}, {1.0, 1}}, {}, {}); }

std::vector<complex_t> f5_poles() { return {{1, 3}, {-4, 2}, {-4, 1}, {0, 2}, {2, 2}, {3, 4}, {1, 4}}; }

/// Tangent at interior sample k from the quadratic through its neighbours.
complex_t tangent(const std::vector<complex_t>& s, std::size_t k) {
  const double h1 = std::abs(s[k] - s[k - 1]), h2 = std::abs(s[k + 1] - s[k]);
  return (s[k + 1] - s[k]) * (h1 / (h2 * (h1 + h2))) + (s[k] - s[k - 1]) * (h2 / (h1 * (h1 + h2)));
}

double hausdorff(const std::vector<complex_t>& a, const std::vector<complex_t>& b) {
  auto one = [](const std::vector<complex_t>& x, const std::vector<complex_t>& y) {
    double worst = 0.0;
    for (const auto& p : x) {
      double best = 1e300;
      for (std::size_t i = 0; i + 1 < y.size(); ++i) best = std::min(best, segment_distance(p, y[i], y[i + 1]));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one(a, b), one(b, a));
}

}  // namespace

TEST(BuildQ, F1IsInverseOfZSquaredMinusOne) {
  auto q = q_f1();
  ASSERT_EQ(q.factors().size(), 2u);
  EXPECT_TRUE(q.zeros().empty());
  for (complex_t z : {complex_t(0.3, 0.7), complex_t(-2.0, 1.0), complex_t(5.0, -3.0)})
    EXPECT_LT(std::abs(q(z) - 1.0 / (z * z - 1.0)), 1e-15 * std::abs(q(z)));
}

TEST(BuildQ, TwoPairsWithCentralCriticalPoint) {
  const double phi = pi / 6;
  std::vector<std::pair<complex_t, int>> e0;
  std::vector<complex_t> z;
  for (double a : {phi, pi - phi, pi + phi, 2 * pi - phi}) {
    z.push_back(std::polar(1.0, a));
    e0.emplace_back(z.back(), 1);
  }
  auto q = build_q(e0, {}, {{0.0, 1}});
  for (complex_t w : {complex_t(0.3, 0.2), complex_t(2.0, -1.0)}) {
    complex_t expect = w * w;
    for (const auto& zj : z) expect /= (w - zj);
    EXPECT_LT(std::abs(q(w) - expect), 1e-14 * std::abs(expect));
  }
}

TEST(BuildQ, NormalizationViolated) {
  EXPECT_THROW(build_q({{-1.0, 1}, {1.0, 1}}, {{0.0, 3}}, {}), input_error);
  EXPECT_THROW(quadratic_differential({-1.0, 1.0, 2.0}, {}), input_error);
  EXPECT_THROW(build_q({{0.0, 0}}, {}, {}), input_error);
}

TEST(BuildQ, CoincidentPoleAndZeroCancel) {
  quadratic_differential q({-1.0, 1.0, 2.0}, {{2.0 + 1e-12, 1}});
  EXPECT_EQ(q.factors().size(), 2u);
}

TEST(Normalization, F1Residual) {
  auto r = validate_normalization(q_f1());
  EXPECT_LT(r.residual, 1e-9);
  EXPECT_TRUE(r.passed);
}

TEST(Normalization, F5ReferenceZerosWithInputPoles) {
  // Reference zero values for the seven-point example with its branch points.
  std::vector<std::pair<complex_t, int>> e0;
  for (auto p : f5_poles()) e0.emplace_back(p, 1);
  auto q = build_q(e0, {{{-3.57021, 1.50570}, 3}, {{-1.28112, 1.30991}, 3}, {{1.54341, 3.19816}, 3}},
                   {{{0.64231, 2.79311}, 1}});
  auto r = validate_normalization(q);
  EXPECT_LT(r.residual, 1e-6);
}

TEST(Normalization, FirstMomentTermIsExtrapolatedAway) {
  // q(R) R^2 - 1 ~ (sum poles - sum zeros) / R for large R; the residual
  // keeps only the next order
  std::vector<std::pair<complex_t, int>> e0;
  for (auto p : f5_poles()) e0.emplace_back(p, 1);
  auto q = build_q(e0, {{{-3.6, 1.6}, 3}, {{-0.07, 2.26}, 3}, {{1.4, 3.16}, 3}}, {{{1.13, 2.98}, 1}});
  auto r = validate_normalization(q);
  complex_t m = 0.0;
  for (const auto& f : q.factors()) m -= static_cast<double>(f.exponent) * f.point;
  EXPECT_GT(std::abs(m) / r.radius, 1e-7);
  EXPECT_LT(r.residual, 1e-3 * std::abs(m) / r.radius);
  EXPECT_TRUE(r.passed);
}

TEST(Normalization, WrongLeadingCoefficientFails) {
  // q ~ z^-3 at infinity
  const auto q = quadratic_differential::from_factors({{-1.0, -1}, {1.0, -1}, {2.0, -1}, {3.0, -1}, {5.0, 1}});
  EXPECT_FALSE(validate_normalization(q).passed);
}

TEST(Period, SegmentOfF1IsIPi) {
  auto v = period_integral(q_f1(), {-1.0, 1.0});
  EXPECT_LT(std::abs(std::abs(v) - pi), 1e-12);
  EXPECT_LT(std::abs(v.real()), 1e-12);
}

TEST(Period, LargeLoopGivesTwoPiI) {
  std::vector<std::pair<complex_t, int>> e0;
  for (auto p : f5_poles()) e0.emplace_back(p, 1);
  auto q = build_q(e0, {{{-3.6, 1.6}, 3}, {{-0.07, 2.26}, 3}, {{1.4, 3.16}, 3}}, {{{1.13, 2.98}, 1}});
  std::vector<complex_t> loop{{-20, -20}, {20, -20}, {20, 20}, {-20, 20}, {-20, -20}};
  auto v = period_integral(q, loop);
  EXPECT_LT(std::abs(std::abs(v) - 2 * pi), 1e-10);
  EXPECT_LT(std::abs(v.real()), 1e-10);
  // a finer polygon through the same region agrees
  std::vector<complex_t> circle;
  for (int k = 0; k <= 64; ++k) circle.push_back(complex_t(-0.5, 2.5) + std::polar(9.0, 2 * pi * k / 64));
  EXPECT_LT(std::abs(std::abs(period_integral(q, circle)) - 2 * pi), 1e-10);
}

TEST(Period, NonTrajectoryPathHasRealPart) {
  auto v = period_integral(q_f1(), {{0.5, 0.0}, {0.5, 1.0}});
  EXPECT_GT(std::abs(v.real()), 1e-2);
}

TEST(Period, MatchesBruteForceContinuation) {
  // tracking the branch by continuity with a fine midpoint sum
  auto q = q_f1();
  std::vector<complex_t> path{{-1.0, 0.0}, {0.0, 0.8}, {1.2, 0.4}, {0.3, -0.6}};
  const int n = 200000;
  complex_t acc = 0.0, prev = 0.0;
  bool first = true;
  for (std::size_t s = 0; s + 1 < path.size(); ++s)
    for (int i = 0; i < n; ++i) {
      const complex_t z = path[s] + (path[s + 1] - path[s]) * ((i + 0.5) / n);
      complex_t r = std::sqrt(q(z));
      if (!first && std::abs(r - prev) > std::abs(r + prev)) r = -r;
      first = false;
      prev = r;
      acc += r * (path[s + 1] - path[s]) / static_cast<double>(n);
    }
  auto v = integrate_sqrt_q(q, path);
  const complex_t a = v.value;
  const double err = std::min(std::abs(a - acc), std::abs(a + acc));
  EXPECT_LT(err, 2e-3);
}

TEST(Period, InteriorSingularityRejected) {
  EXPECT_THROW(period_integral(q_f1(), {{-2.0, 0.0}, {2.0, 0.0}}), input_error);
  EXPECT_THROW(period_integral(q_f1(), {{-1.0, 1.0}, {1.0, 0.0}, {2.0, 1.0}}), input_error);
}

TEST(Stars, CubicZero) {
  auto q = quadratic_differential::from_factors({{0.0, 1}});
  auto a = star_angles(q, 0);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_NEAR(a[0], pi / 3, 1e-14);
  EXPECT_NEAR(a[1], pi, 1e-14);
  EXPECT_NEAR(a[2], 5 * pi / 3, 1e-14);
}

TEST(Stars, SimplePoleHasOneDirection) {
  auto q = q_f1();
  const int idx = q.singular_index(1.0, 1e-12);
  auto d = star_directions(q, idx);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_LT(std::abs(d[0] + 1.0), 1e-14);  // points into [-1, 1]
}

TEST(Trace, RealSegmentFromOrigin) {
  auto q = q_f1();
  auto arc = trace_trajectory(q, 0.0, 1.0, stop_rules::defaults(q));
  for (const auto& s : arc.samples) EXPECT_LT(std::abs(s.imag()), 1e-12);
  EXPECT_EQ(arc.end.kind, anchor_kind::branch_point);
  EXPECT_LT(std::abs(arc.samples.back() - 1.0), 1e-8);
}

TEST(Trace, PoleToPoleAndConditionAtSamples) {
  auto q = q_f1();
  auto rules = stop_rules::defaults(q);
  auto arc = trace_trajectory(q, -1.0, 1.0, rules);
  EXPECT_EQ(arc.end.kind, anchor_kind::branch_point);
  EXPECT_EQ(arc.samples.back(), complex_t(1.0));
  EXPECT_NEAR(arc.imaginary_length, pi, 1e-8);
  for (std::size_t k = 1; k + 1 < arc.samples.size(); ++k) {
    if (std::abs(arc.samples[k] - arc.samples[k - 1]) > rules.max_step * (1 + 1e-9)) ADD_FAILURE();
  }
}

TEST(Trace, F5LikeArcsSatisfyConditionAndReverse) {
  std::vector<std::pair<complex_t, int>> e0;
  for (auto p : f5_poles()) e0.emplace_back(p, 1);
  auto q = build_q(e0, {{{-3.60225458, 1.63497269}, 3}, {{-0.06915499, 2.25992177}, 3}, {{1.40114693, 3.16483037}, 3}},
                   {{{1.13521511, 2.98502612}, 1}});
  auto rules = stop_rules::defaults(q);
  for (int p = 0; p < 7; ++p) {
    auto arc = trace_trajectory(q, q.factors()[p].point, star_directions(q, p)[0], rules);
    ASSERT_NE(arc.end.kind, anchor_kind::open) << p;
    EXPECT_LT(std::abs(arc.period.real()) / (1 + std::abs(arc.period.imag())), 1e-5);
    for (std::size_t k = 2; k + 2 < arc.samples.size(); ++k) {
      const complex_t t = tangent(arc.samples, k);
      const complex_t z = arc.samples[k];
      const complex_t r = std::sqrt(q(z)) * t;
      EXPECT_LT(r.real() * r.real() / (std::abs(q(z)) * std::norm(t)), 1e-6);
    }
    // reverse from the far anchor along the arc's incoming direction
    const int e = arc.end.index;
    // incoming direction read off away from the zero, where rounding of the
    // zero positions does not bend the arc
    std::size_t j = arc.samples.size() - 2;
    while (j > 0 && std::abs(arc.samples[j] - arc.samples.back()) < 1e-3 * q.scale()) --j;
    const complex_t back_dir = arc.samples[j] - arc.samples.back();
    auto rev = trace_trajectory(q, q.factors()[e].point, back_dir, rules);
    EXPECT_EQ(rev.end.index, p);
    EXPECT_LT(hausdorff(arc.samples, rev.samples), 10 * 1e-4 * q.scale());
  }
}
