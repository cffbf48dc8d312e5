#pragma once

// Test-only oracles, independent of the library's implementation paths.

#include <cmath>
#include <cstddef>
#include <optional>
#include <queue>
#include <vector>

#include "mobigg/core/geometry.hpp"

namespace mobigg::test_oracles {

/// Component partition by BFS over the full pairwise distance matrix.
/// Quadratic and obviously correct; the union-find cell list must match it.
inline std::vector<int> bfs_components(const core::PointMatrix& pts, double r,
                                       std::optional<double> torus_side) {
  const auto n = static_cast<std::size_t>(pts.rows());
  const int d = static_cast<int>(pts.cols());
  const double r_sq = r * r;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* a = pts.row(static_cast<Eigen::Index>(i)).data();
      const double* b = pts.row(static_cast<Eigen::Index>(j)).data();
      const double sq = torus_side
                            ? core::torus_sq_dist(a, b, d, *torus_side)
                            : core::euclid_sq_dist(a, b, d);
      if (sq <= r_sq) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] >= 0) continue;
    label[i] = next;
    std::queue<std::size_t> frontier;
    frontier.push(i);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (const std::size_t v : adj[u])
        if (label[v] < 0) {
          label[v] = next;
          frontier.push(v);
        }
    }
    ++next;
  }
  return label;
}

/// Same partition up to relabeling?
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::vector<int> map_ab, map_ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto la = static_cast<std::size_t>(a[i]);
    const auto lb = static_cast<std::size_t>(b[i]);
    if (map_ab.size() <= la) map_ab.resize(la + 1, -1);
    if (map_ba.size() <= lb) map_ba.resize(lb + 1, -1);
    if (map_ab[la] < 0) map_ab[la] = b[i];
    if (map_ba[lb] < 0) map_ba[lb] = a[i];
    if (map_ab[la] != b[i] || map_ba[lb] != a[i]) return false;
  }
  return true;
}

}  // namespace mobigg::test_oracles
