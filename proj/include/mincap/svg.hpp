#pragma once

// Static SVG rendering of a minimal set: arcs as polylines, branch points as
// filled dots, bifurcation and critical points as rings, poles as stars.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "minimal_set.hpp"

namespace mincap {

struct svg_options {
  int width = 640;
  double margin = 0.08;  // fraction of the drawing box
  std::vector<complex_t> poles;
};

inline std::string render_svg(const minimal_set& set, const svg_options& opt = {}) {
  std::vector<complex_t> all;
  for (const auto& a : set.arcs) all.insert(all.end(), a.samples.begin(), a.samples.end());
  for (const auto& n : set.nodes) all.push_back(n.point);
  for (const auto& [p, j] : set.e2) all.push_back(p);
  all.insert(all.end(), opt.poles.begin(), opt.poles.end());
  if (all.empty()) throw input_error("render_svg: nothing to draw");
  double x0 = all[0].real(), x1 = x0, y0 = all[0].imag(), y1 = y0;
  for (auto z : all) {
    x0 = std::min(x0, z.real());
    x1 = std::max(x1, z.real());
    y0 = std::min(y0, z.imag());
    y1 = std::max(y1, z.imag());
  }
  const double span = std::max({x1 - x0, y1 - y0, 1e-9});
  const double pad = opt.margin * span;
  x0 -= pad;
  y0 -= pad;
  const double w = (x1 - x0) + pad, h = (y1 - y0) + pad;
  const double k = opt.width / std::max(w, h);
  const int W = static_cast<int>(std::ceil(w * k)), H = static_cast<int>(std::ceil(h * k));
  auto X = [&](complex_t z) { return (z.real() - x0) * k; };
  auto Y = [&](complex_t z) { return (y0 + h - z.imag()) * k; };  // imaginary axis up
  const double r = 0.008 * opt.width;

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& a : set.arcs) {
    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (auto z : a.samples) os << X(z) << ',' << Y(z) << ' ';
    os << "\"/>\n";
  }
  for (const auto& n : set.nodes) {
    if (n.kind == node_kind::e0)
      os << "<circle cx=\"" << X(n.point) << "\" cy=\"" << Y(n.point) << "\" r=\"" << r << "\" fill=\"black\"/>\n";
    else
      os << "<circle cx=\"" << X(n.point) << "\" cy=\"" << Y(n.point) << "\" r=\"" << r
         << "\" fill=\"white\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  }
  for (const auto& [p, j] : set.e2)
    os << "<circle cx=\"" << X(p) << "\" cy=\"" << Y(p) << "\" r=\"" << r
       << "\" fill=\"none\" stroke=\"gray\" stroke-width=\"1.5\"/>\n";
  for (auto p : opt.poles) {
    os << "<polygon fill=\"crimson\" points=\"";
    for (int i = 0; i < 10; ++i) {
      const double rad = (i % 2 ? 0.45 : 1.1) * r;
      const double t = pi / 2 + i * pi / 5;
      os << X(p) + rad * std::cos(t) << ',' << Y(p) - rad * std::sin(t) << ' ';
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace mincap
