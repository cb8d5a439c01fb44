#pragma once

#include <numeric>
#include <vector>

#include "qdiff.hpp"

namespace mincap {

enum class node_kind { e0, e1 };

struct set_node {
  complex_t point;
  node_kind kind = node_kind::e0;
  int index = 1;  // bifurcation index: number of arcs meeting here
};

/// Arcs of a minimal set together with their end nodes and components.
struct minimal_set {
  std::vector<set_node> nodes;                 // E0 first, then E1
  std::vector<std::pair<complex_t, int>> e2;   // (point, order j)
  std::vector<trajectory_arc> arcs;
  std::vector<std::pair<int, int>> arc_nodes;  // node index of each arc end
  std::vector<std::vector<int>> components;    // node indices

  std::vector<std::pair<complex_t, int>> e0() const { return select(node_kind::e0); }
  std::vector<std::pair<complex_t, int>> e1() const { return select(node_kind::e1); }

  std::vector<complex_t> e0_points() const {
    std::vector<complex_t> out;
    for (const auto& n : nodes)
      if (n.kind == node_kind::e0) out.push_back(n.point);
    return out;
  }

  /// Indices of the arcs whose end nodes lie in component c.
  std::vector<int> component_arcs(std::size_t c) const {
    std::vector<int> out;
    for (std::size_t a = 0; a < arcs.size(); ++a)
      for (int n : components[c])
        if (arc_nodes[a].first == n) { out.push_back(static_cast<int>(a)); break; }
    return out;
  }

  double scale() const {
    std::vector<complex_t> pts;
    for (const auto& n : nodes) pts.push_back(n.point);
    return pts.size() >= 2 ? point_scale(pts) : 1.0;
  }

 private:
  std::vector<std::pair<complex_t, int>> select(node_kind k) const {
    std::vector<std::pair<complex_t, int>> out;
    for (const auto& n : nodes)
      if (n.kind == k) out.emplace_back(n.point, n.index);
    return out;
  }
};

/// Connected components of an undirected graph on n vertices.
inline std::vector<std::vector<int>> connected_components(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : edges) parent[find(a)] = find(b);
  std::vector<std::vector<int>> comps;
  std::vector<int> slot(n, -1);
  for (int v = 0; v < n; ++v) {
    const int r = find(v);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[slot[r]].push_back(v);
  }
  return comps;
}

}  // namespace mincap
