#pragma once

// Expression trees for algebraic functions built from fractional powers of
// polynomial products, normalized at infinity.

#include <memory>
#include <numeric>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "polyroots.hpp"
#include "series.hpp"

namespace mincap {

class function_expr;

struct constant_node {
  complex_t value;
};
/// [prod_j (1 - z_j/z)]^(power/order)
struct root_product_node {
  std::vector<complex_t> points;
  int order = 2;
  int power = 1;
};
/// coefficient * z^power, power <= 0
struct monomial_node {
  int power = 0;
  complex_t coefficient{1.0, 0.0};
};
struct sum_node {
  std::vector<function_expr> children;
};
/// children[0] - children[1] - ...
struct difference_node {
  std::vector<function_expr> children;
};
struct product_node {
  std::vector<function_expr> children;
};
struct fractional_power_node {
  std::shared_ptr<const function_expr> child;
  rational_exponent exponent;
  /// Newton seeds for zeros of the child when no defining polynomial is known.
  std::vector<complex_t> seeds;
};

using expr_node = std::variant<constant_node, root_product_node, monomial_node, sum_node,
                               difference_node, product_node, fractional_power_node>;

class function_expr {
 public:
  function_expr() : node_(std::make_shared<expr_node>(constant_node{{1.0, 0.0}})) {}
  template <class Node, class = std::enable_if_t<std::is_constructible_v<expr_node, Node>>>
  function_expr(Node n) : node_(std::make_shared<expr_node>(std::move(n))) {}  // NOLINT
  const expr_node& node() const { return *node_; }

 private:
  std::shared_ptr<const expr_node> node_;
};

inline function_expr constant(complex_t v) { return constant_node{v}; }
inline function_expr root_product(std::vector<complex_t> pts, int order, int power = 1) {
  return root_product_node{std::move(pts), order, power};
}
inline function_expr monomial(int power, complex_t c = 1.0) { return monomial_node{power, c}; }
inline function_expr sum(std::vector<function_expr> c) { return sum_node{std::move(c)}; }
inline function_expr difference(std::vector<function_expr> c) { return difference_node{std::move(c)}; }
inline function_expr product(std::vector<function_expr> c) { return product_node{std::move(c)}; }
inline function_expr fractional_power(function_expr child, rational_exponent e,
                                      std::vector<complex_t> seeds = {}) {
  return fractional_power_node{std::make_shared<const function_expr>(std::move(child)), e, std::move(seeds)};
}

namespace detail {
template <class... F>
struct overload : F... {
  using F::operator()...;
};
template <class... F>
overload(F...) -> overload<F...>;
}  // namespace detail

/// Throws input_error when the tree is not well formed.
inline void validate(const function_expr& f) {
  std::visit(detail::overload{
                 [](const constant_node&) {},
                 [](const root_product_node& n) {
                   if (n.points.empty()) throw input_error("rootProduct group is empty");
                   if (n.order < 2) throw input_error("rootProduct order must be at least 2");
                   if (n.power == 0) throw input_error("rootProduct power must be nonzero");
                 },
                 [](const monomial_node& n) {
                   if (n.power > 0) throw input_error("monomial power must be <= 0 (expansion at infinity)");
                 },
                 [](const auto& n) -> decltype(n.children, void()) {
                   if (n.children.empty()) throw input_error("composite node without children");
                   for (const auto& c : n.children) validate(c);
                 },
                 [](const fractional_power_node& n) {
                   if (!n.child) throw input_error("fractionalPower without child");
                   n.exponent.reduced();
                   validate(*n.child);
                 },
             },
             f.node());
}

namespace detail {

template <class C>
laurent_series<C> expand(const function_expr& f, int n) {
  return std::visit(
      overload{
          [&](const constant_node& c) { return laurent_series<C>::constant(from_complex<C>(c.value), n); },
          [&](const root_product_node& r) {
            // prod (1 - z_j w) as a polynomial in w, then the fractional power
            std::vector<C> poly(n + 1, C(0));
            poly[0] = C(1);
            for (const auto& p : r.points) {
              const C zj = from_complex<C>(p);
              for (int k = n; k >= 1; --k) poly[k] = poly[k] - zj * poly[k - 1];
            }
            return series_pow(laurent_series<C>(0, n, std::move(poly)), {r.power, r.order});
          },
          [&](const monomial_node& m) {
            const int k0 = -m.power;
            if (k0 > n) return laurent_series<C>::constant(C(0), n);
            std::vector<C> c(n - k0 + 1, C(0));
            c[0] = from_complex<C>(m.coefficient);
            return laurent_series<C>(k0, n, std::move(c));
          },
          [&](const sum_node& s) {
            auto acc = expand<C>(s.children[0], n);
            for (std::size_t i = 1; i < s.children.size(); ++i) acc = acc + expand<C>(s.children[i], n);
            return acc;
          },
          [&](const difference_node& s) {
            auto acc = expand<C>(s.children[0], n);
            for (std::size_t i = 1; i < s.children.size(); ++i) acc = acc - expand<C>(s.children[i], n);
            return acc;
          },
          [&](const product_node& s) {
            auto acc = expand<C>(s.children[0], n);
            for (std::size_t i = 1; i < s.children.size(); ++i) {
              auto next = expand<C>(s.children[i], n);
              acc = acc * next;
            }
            return acc;
          },
          [&](const fractional_power_node& p) {
            auto child = expand<C>(*p.child, n);
            using std::abs;
            if (child.first() > 0 || abs(child[0]) == real_of<C>(0))
              throw input_error("fractionalPower child vanishes at infinity");
            return series_pow(child.reshaped(0, std::min(n, child.order())), p.exponent);
          },
      },
      f.node());
}

}  // namespace detail

/// Coefficients c_0..c_n of z^(-k) for the branch anchored at infinity.
template <class C = complex_t>
laurent_series<C> expand_at_infinity(const function_expr& f, int n) {
  if (n < 0) throw input_error("expand_at_infinity: N must be >= 0");
  validate(f);
  // Products of series with positive leading index lose nothing, so a
  // margin is only needed for monomials, which shift by at most their power.
  auto s = detail::expand<C>(f, n);
  if (s.order() < n) throw input_error("expansion lost truncation order");
  for (int k = s.first(); k < 0; ++k)
    if (!(s[k] == C(0))) throw input_error("expression has a pole at infinity");
  return s.reshaped(0, n);
}

/// Principal-branch pointwise evaluation. Only used to polish zeros of
/// fractionalPower children from user seeds.
inline complex_t evaluate_principal(const function_expr& f, complex_t z) {
  using detail::overload;
  return std::visit(
      overload{
          [&](const constant_node& c) { return c.value; },
          [&](const root_product_node& r) {
            complex_t acc = 0.0;
            for (const auto& p : r.points) acc += std::log(1.0 - p / z);
            return std::exp(acc * (static_cast<double>(r.power) / r.order));
          },
          [&](const monomial_node& m) { return m.coefficient * std::pow(z, static_cast<double>(m.power)); },
          [&](const sum_node& s) {
            complex_t acc = 0.0;
            for (const auto& c : s.children) acc += evaluate_principal(c, z);
            return acc;
          },
          [&](const difference_node& s) {
            complex_t acc = evaluate_principal(s.children[0], z);
            for (std::size_t i = 1; i < s.children.size(); ++i) acc -= evaluate_principal(s.children[i], z);
            return acc;
          },
          [&](const product_node& s) {
            complex_t acc = 1.0;
            for (const auto& c : s.children) acc *= evaluate_principal(c, z);
            return acc;
          },
          [&](const fractional_power_node& p) {
            return std::pow(evaluate_principal(*p.child, z), p.exponent.value());
          },
      },
      f.node());
}

/// A set of branch points whose monodromy is governed by one root.
struct branch_group {
  std::vector<complex_t> points;
  /// A component must contain a multiple of this many points of the group.
  int modulus = 2;
  /// Points introduced by a fractionalPower node; they may be inactive.
  bool optional = false;
};

namespace detail {

inline void collect_groups(const function_expr& f, std::vector<branch_group>& out);

/// Zeros of child when child = +/- R^(p/n) + constants for a single root product R.
inline bool defining_polynomial_zeros(const function_expr& child, std::vector<complex_t>& zeros) {
  const root_product_node* rp = nullptr;
  double rp_sign = 1.0;
  complex_t c = 0.0;
  auto take = [&](const function_expr& e, double sign) {
    if (auto* k = std::get_if<constant_node>(&e.node())) { c += sign * k->value; return true; }
    if (auto* r = std::get_if<root_product_node>(&e.node())) {
      if (rp) return false;
      rp = r;
      rp_sign = sign;
      return true;
    }
    return false;
  };
  if (auto* s = std::get_if<sum_node>(&child.node())) {
    for (const auto& e : s->children)
      if (!take(e, 1.0)) return false;
  } else if (auto* d = std::get_if<difference_node>(&child.node())) {
    for (std::size_t i = 0; i < d->children.size(); ++i)
      if (!take(d->children[i], i == 0 ? 1.0 : -1.0)) return false;
  } else if (std::holds_alternative<root_product_node>(child.node())) {
    return true;  // zeros are the declared points
  } else {
    return false;
  }
  if (!rp) return false;
  if (c == 0.0) return true;
  // sign R^(p/n) + c = 0  =>  R^p = (-c/sign)^n with R = prod(z - z_j) / z^m
  const complex_t target = std::pow(-c / rp_sign, rp->order);
  const int p = std::abs(rp->power);
  const int m = static_cast<int>(rp->points.size());
  std::vector<complex_t> prod{1.0};  // ascending coefficients of prod (z - z_j)^p
  for (int r = 0; r < p; ++r)
    for (const auto& zj : rp->points) {
      std::vector<complex_t> next(prod.size() + 1, 0.0);
      for (std::size_t k = 0; k < prod.size(); ++k) {
        next[k + 1] += prod[k];
        next[k] -= zj * prod[k];
      }
      prod = std::move(next);
    }
  const int deg = m * p;
  std::vector<complex_t> poly(deg + 1, 0.0);
  if (rp->power > 0) {
    for (int k = 0; k <= deg; ++k) poly[k] = prod[k];
    poly[deg] -= target;
  } else {
    for (int k = 0; k <= deg; ++k) poly[k] = prod[k] * target;
    poly[deg] -= 1.0;
  }
  double big = 0.0;
  for (const auto& a : poly) big = std::max(big, std::abs(a));
  while (poly.size() > 1 && std::abs(poly.back()) < 1e-13 * big) poly.pop_back();
  if (poly.size() < 2) return true;
  for (const auto& z : polynomial_roots(poly)) {
    bool known = false;
    for (const auto& zj : rp->points) known = known || std::abs(z - zj) < 1e-9 * (1.0 + std::abs(zj));
    if (!known) zeros.push_back(z);
  }
  return true;
}

inline std::vector<complex_t> newton_zeros(const fractional_power_node& p) {
  if (p.seeds.empty())
    throw numerical_error("fractionalPower branch points need seeds: no defining polynomial recognized");
  std::vector<complex_t> out;
  std::string report;
  for (const auto& s : p.seeds) {
    complex_t z = s;
    double res = 0.0;
    for (int it = 0; it < 60; ++it) {
      const complex_t v = evaluate_principal(*p.child, z);
      const double h = 1e-7 * (1.0 + std::abs(z));
      const complex_t d = (evaluate_principal(*p.child, z + h) - evaluate_principal(*p.child, z - h)) / (2.0 * h);
      res = std::abs(v);
      if (res < 1e-13) break;
      z -= v / d;
    }
    res = std::abs(evaluate_principal(*p.child, z));
    if (!(res < 1e-10))
      report += " seed (" + std::to_string(s.real()) + "," + std::to_string(s.imag()) +
                ") residual " + std::to_string(res) + ";";
    else
      out.push_back(z);
  }
  if (!report.empty()) throw numerical_error("fractionalPower branch points not located:" + report);
  return out;
}

inline void collect_groups(const function_expr& f, std::vector<branch_group>& out) {
  std::visit(overload{
                 [](const constant_node&) {},
                 [](const monomial_node&) {},
                 [&](const root_product_node& r) {
                   const int g = std::gcd(r.order, std::abs(r.power));
                   out.push_back({r.points, r.order / g, false});
                 },
                 [&](const auto& n) -> decltype(n.children, void()) {
                   for (const auto& c : n.children) collect_groups(c, out);
                 },
                 [&](const fractional_power_node& p) {
                   collect_groups(*p.child, out);
                   const auto e = p.exponent.reduced();
                   if (e.den == 1) return;
                   std::vector<complex_t> zeros;
                   if (!defining_polynomial_zeros(*p.child, zeros)) zeros = newton_zeros(p);
                   if (!zeros.empty()) out.push_back({zeros, static_cast<int>(e.den), true});
                 },
             },
             f.node());
}

}  // namespace detail

/// Branch-point groups: declared root products first, then zeros of
/// fractionalPower children.
inline std::vector<branch_group> branch_points(const function_expr& f) {
  validate(f);
  std::vector<branch_group> out;
  detail::collect_groups(f, out);
  return out;
}

enum class connectivity_mode { exact, at_least };

struct connectivity_constraint {
  std::vector<branch_group> groups;
  connectivity_mode mode = connectivity_mode::exact;

  std::vector<complex_t> all_points() const {
    std::vector<complex_t> pts;
    for (const auto& g : groups) pts.insert(pts.end(), g.points.begin(), g.points.end());
    return pts;
  }
};

/// Square roots allow pairings; a k-th root over a group of k points forces
/// the whole group into one component.
inline connectivity_constraint admissible_connectivity(const function_expr& f) {
  connectivity_constraint c;
  c.groups = branch_points(f);
  c.mode = connectivity_mode::exact;
  for (const auto& g : c.groups)
    if (g.optional || g.modulus != static_cast<int>(g.points.size())) c.mode = connectivity_mode::at_least;
  return c;
}

}  // namespace mincap
