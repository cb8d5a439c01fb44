#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "mincap/problems.hpp"
#include "mincap/solver.hpp"

using namespace mincap;

namespace {

solve_spec spec_for(const function_expr& f) {
  solve_spec s;
  s.constraint = admissible_connectivity(f);
  return s;
}

/// Solves are expensive; each example is solved once per process.
const solve_result& solved(const std::string& name) {
  static std::map<std::string, solve_result> cache;
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  function_expr f = problems::f1();
  if (name == "f2") f = problems::f2(pi / 6);
  if (name == "f3") f = problems::f3(pi / 6);
  if (name == "f5") f = problems::f5();
  return cache.emplace(name, solve_general(spec_for(f))).first->second;
}

std::vector<complex_t> sorted(std::vector<complex_t> v) {
  std::sort(v.begin(), v.end(), [](complex_t a, complex_t b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

std::vector<complex_t> zeros_of(const quadratic_differential& q, int multiplicity) {
  std::vector<complex_t> out;
  for (const auto& [z, m] : q.zeros())
    if (m == multiplicity) out.push_back(z);
  return sorted(out);
}

}  // namespace

TEST(FourPoint, MatchesIndependentQuadrature) {
  // root of the same integral evaluated with mpmath at 30 digits
  const auto r = solve_symmetric_four_point(pi / 6);
  EXPECT_NEAR(r.a0, 0.2315310845524369, 1e-9);
  EXPECT_NEAR(r.z5.real(), std::sqrt(0.2315310845524369), 1e-9);
  EXPECT_EQ(r.z6, -r.z5);
}

TEST(FourPoint, IntegralChangesSignOnce) {
  for (double phi : {pi / 8, pi / 6, pi / 5}) {
    EXPECT_GT(detail::four_point_integral(1e-9, phi), 0.0);
    EXPECT_LT(detail::four_point_integral(1.0, phi), 0.0);
    double prev = detail::four_point_integral(1e-6, phi);
    for (int k = 1; k <= 20; ++k) {
      const double cur = detail::four_point_integral(0.05 * k, phi);
      EXPECT_LT(cur, prev);
      prev = cur;
    }
  }
}

TEST(FourPoint, DiagonalLimitAndRotation) {
  const auto mid = solve_symmetric_four_point(pi / 4);
  EXPECT_EQ(mid.a0, 0.0);
  EXPECT_EQ(mid.z5, complex_t(0.0));
  const auto a = solve_symmetric_four_point(pi / 6);
  const auto b = solve_symmetric_four_point(pi / 3);
  EXPECT_NEAR(b.a0, -a.a0, 1e-12);
  EXPECT_NEAR(std::abs(b.z5 - complex_t(0.0, 1.0) * a.z5), 0.0, 1e-12);
}

TEST(FourPoint, RejectsAnglesOutsideTheQuadrant) {
  for (double phi : {0.0, -0.1, pi / 2, 2.0}) EXPECT_THROW(solve_symmetric_four_point(phi), input_error);
}

TEST(Enumerate, SinglePair) {
  const auto c = enumerate_connectivity(admissible_connectivity(problems::f1()));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].e1_count, 0);
  EXPECT_EQ(c[0].e2_count, 0);
}

TEST(Enumerate, FourthRootForcesOneComponent) {
  const auto c = enumerate_connectivity(admissible_connectivity(problems::f3(pi / 6)));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].e1_count, 2);
  EXPECT_EQ(c[0].blocks.size(), 1u);
}

TEST(Enumerate, SquareRootAllowsPairings) {
  const auto c = enumerate_connectivity(admissible_connectivity(problems::f2(pi / 6)));
  std::vector<std::string> enc;
  for (const auto& t : c) enc.push_back(t.encoding);
  EXPECT_EQ(enc, (std::vector<std::string>{"{0,1,2,3}", "{0,1}{2,3}", "{0,2}{1,3}", "{0,3}{1,2}"}));
  for (const auto& t : c) EXPECT_EQ(t.e1_count + 2 * t.e2_count, 2);
}

TEST(Enumerate, SevenPointsTwoCandidates) {
  const auto c = enumerate_connectivity(admissible_connectivity(problems::f5()));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].encoding, "{0,1,2,3,4,5,6}");
  EXPECT_EQ(c[0].e1_count, 5);
  EXPECT_EQ(c[1].encoding, "{0,1,2,3}{4,5,6}");
  EXPECT_EQ(c[1].e1_count, 3);
  EXPECT_EQ(c[1].e2_count, 1);
}

TEST(Enumerate, DegreeBookkeepingHolds) {
  // zeros counted with multiplicity equal poles minus two
  for (const auto& f : {problems::f2(0.4), problems::f3(0.4), problems::f5()})
    for (const auto& t : enumerate_connectivity(admissible_connectivity(f))) {
      int active = 0;
      for (const auto& b : t.blocks) active += static_cast<int>(b.size());
      EXPECT_EQ(t.e1_count + 2 * t.e2_count, active - 2);
    }
}

TEST(Enumerate, OptionalPointsMayBeInactive) {
  const auto c = enumerate_connectivity(admissible_connectivity(problems::f4(pi / 6, 0.3)));
  bool only_old = false, all_eight = false;
  for (const auto& t : c) {
    if (t.inactive.size() == 4 && t.blocks.size() == 1) only_old = true;
    if (t.inactive.empty() && t.blocks.size() == 1) all_eight = true;
  }
  EXPECT_TRUE(only_old);
  EXPECT_TRUE(all_eight);
}

TEST(Solve, SegmentNeedsNoUnknowns) {
  const auto& r = solved("f1");
  EXPECT_TRUE(r.q.zeros().empty());
  ASSERT_EQ(r.set.arcs.size(), 1u);
  const auto& arc = r.set.arcs[0].samples;
  EXPECT_NEAR(std::abs(std::abs(arc.front()) - 1.0), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(arc.front() + arc.back()), 0.0, 1e-8);
  for (auto z : arc) EXPECT_NEAR(z.imag(), 0.0, 1e-8);
}

TEST(Solve, FourthRootAgreesWithEllipticSolver) {
  for (double phi : {pi / 8, pi / 6, pi / 5}) {
    const auto r = solve_general(spec_for(problems::f3(phi)));
    const auto z = zeros_of(r.q, 1);
    ASSERT_EQ(z.size(), 2u);
    const double z5 = solve_symmetric_four_point(phi).z5.real();
    EXPECT_NEAR(std::abs(z[1] - z5), 0.0, 1e-4);
    EXPECT_NEAR(std::abs(z[0] + z5), 0.0, 1e-4);
    EXPECT_EQ(r.set.arcs.size(), 5u);
    EXPECT_EQ(r.set.e1().size(), 2u);
    EXPECT_TRUE(r.set.e2.empty());
  }
}

TEST(Solve, SquareRootSplitsIntoNearPairs) {
  const auto& r = solved("f2");
  EXPECT_EQ(r.topology, "{0,3}{1,2}");
  ASSERT_EQ(r.set.e2.size(), 1u);
  EXPECT_NEAR(std::abs(r.set.e2[0].first), 0.0, 1e-8);
  EXPECT_EQ(r.set.arcs.size(), 2u);
  EXPECT_EQ(r.set.components.size(), 2u);
}

TEST(Solve, SquareRootArcsAreHyperbolaSections) {
  const auto& r = solved("f2");
  for (const auto& arc : r.set.arcs) {
    const complex_t a = arc.samples.front() * arc.samples.front();
    const complex_t b = arc.samples.back() * arc.samples.back();
    const double len = std::abs(b - a);
    double worst = 0.0;
    for (auto z : arc.samples) worst = std::max(worst, std::abs(cross(b - a, z * z - a)) / len);
    EXPECT_LT(worst / len, 1e-5);
  }
}

TEST(Solve, SevenPointsTwoComponents) {
  const auto& r = solved("f5");
  EXPECT_EQ(r.topology, "{0,1,2,3}{4,5,6}");
  EXPECT_EQ(r.set.arcs.size(), 8u);
  EXPECT_EQ(r.set.e1().size(), 3u);
  EXPECT_EQ(r.set.e2.size(), 1u);
  EXPECT_EQ(r.set.components.size(), 2u);
}

TEST(Solve, ResidualCertificate) {
  for (const char* name : {"f1", "f2", "f3", "f5"}) {
    const auto& r = solved(name);
    for (const auto& arc : r.set.arcs) EXPECT_LT(std::abs(arc.period.real()), 1e-6) << name;
    EXPECT_LT(r.certificate.shooting_mismatch, 1e-6 * r.q.scale()) << name;
    int zeros = 0, poles = 0;
    for (const auto& [z, m] : r.q.zeros()) zeros += m;
    poles = static_cast<int>(r.q.poles().size());
    EXPECT_EQ(zeros + 2, poles) << name;
  }
}

TEST(Solve, SelectedCandidateHasSmallestCapacity) {
  for (const char* name : {"f2", "f5"}) {
    const auto& r = solved(name);
    for (const auto& c : r.candidates)
      if (c.realized && std::isfinite(c.capacity)) EXPECT_LE(r.capacity, c.capacity) << c.encoding;
  }
}

TEST(Solve, SymmetricInputGivesSymmetricOutput) {
  const auto& r = solved("f3");
  const auto z = zeros_of(r.q, 1);
  EXPECT_NEAR(std::abs(z[0] + z[1]), 0.0, 1e-8);
  EXPECT_NEAR(std::abs(z[0].imag()), 0.0, 1e-8);
  // the arc set is invariant under conjugation and under z -> -z
  for (const auto& map : {+[](complex_t w) { return std::conj(w); }, +[](complex_t w) { return -w; }})
    for (const auto& arc : r.set.arcs) {
      std::vector<complex_t> image;
      for (auto w : arc.samples) image.push_back(map(w));
      double best = std::numeric_limits<double>::max();
      for (const auto& other : r.set.arcs) best = std::min(best, detail::polyline_hausdorff(image, other.samples));
      EXPECT_LT(best, 1e-3 * r.q.scale());
    }
}

TEST(Solve, DeterministicAcrossRuns) {
  const auto a = solve_general(spec_for(problems::f3(pi / 6)));
  const auto b = solve_general(spec_for(problems::f3(pi / 6)));
  ASSERT_EQ(a.q.zeros().size(), b.q.zeros().size());
  for (std::size_t i = 0; i < a.q.zeros().size(); ++i) EXPECT_EQ(a.q.zeros()[i].first, b.q.zeros()[i].first);
  EXPECT_EQ(a.capacity, b.capacity);
}

TEST(Solve, ReportsEveryCandidateOnFailure) {
  auto s = spec_for(problems::f3(pi / 6));
  s.max_iterations = 0;
  s.max_starts = 1;
  try {
    solve_general(s);
    FAIL() << "expected failure";
  } catch (const numerical_error& e) {
    EXPECT_NE(std::string(e.what()).find("{0,1,2,3} residual"), std::string::npos);
  }
}

TEST(Solve, TopologyFilter) {
  auto s = spec_for(problems::f2(pi / 6));
  s.topologies = {"{0,1,2,3}"};
  const auto r = solve_general(s);
  EXPECT_EQ(r.topology, "{0,1,2,3}");
  EXPECT_EQ(r.set.components.size(), 1u);
  s.topologies = {"{0,1}"};
  EXPECT_THROW(solve_general(s), input_error);
}

TEST(Extract, UnsolvedZerosAreRejected) {
  const quadratic_differential q(problems::symmetric_points(pi / 6), {{0.3, 1}, {-0.3, 1}});
  EXPECT_THROW(extract_minimal_set(q, problems::symmetric_points(pi / 6)), numerical_error);
}

TEST(Extract, FourthRootStructure) {
  const auto& r = solved("f3");
  const auto set = extract_minimal_set(r.q, problems::symmetric_points(pi / 6));
  EXPECT_EQ(set.arcs.size(), 5u);
  EXPECT_EQ(set.components.size(), 1u);
  for (const auto& n : set.nodes) EXPECT_EQ(n.index, n.kind == node_kind::e0 ? 1 : 3);
}
