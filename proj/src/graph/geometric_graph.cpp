#include "mobigg/graph/geometric_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mobigg::graph {

namespace {

// Union-find with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

constexpr std::uint64_t kCellOffset = 1u << 15;

inline std::uint64_t pack_cell(const int* c, int d) {
  std::uint64_t key = 0;
  for (int k = 0; k < d; ++k)
    key = (key << 16) | static_cast<std::uint16_t>(c[k] + kCellOffset);
  return key;
}

}  // namespace

GeometricGraph::GeometricGraph(core::PointMatrix positions, double r,
                               std::optional<double> torus_side)
    : positions_(std::move(positions)), r_(r), torus_side_(torus_side) {
  if (r_ <= 0) throw std::invalid_argument("GeometricGraph: r must be > 0");
  if (torus_side_) {
    cells_per_axis_ = std::max(1, static_cast<int>(std::floor(*torus_side_ / r_)));
    cell_side_ = *torus_side_ / cells_per_axis_;
  } else {
    cell_side_ = r_;
  }
  build_cells();
  label_components();
}

std::uint64_t GeometricGraph::cell_key_of(const double* p) const {
  int c[4] = {0, 0, 0, 0};
  const int d = dim();
  for (int k = 0; k < d; ++k) {
    int idx = static_cast<int>(std::floor(p[k] / cell_side_));
    if (torus_side_) {
      idx %= cells_per_axis_;
      if (idx < 0) idx += cells_per_axis_;
    }
    c[k] = idx;
  }
  return pack_cell(c, d);
}

void GeometricGraph::build_cells() {
  const std::size_t n = size();
  cells_.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    cells_[cell_key_of(positions_.row(static_cast<Eigen::Index>(i)).data())]
        .push_back(static_cast<std::uint32_t>(i));
}

double GeometricGraph::sq_dist(std::size_t a, std::size_t b) const {
  const double* pa = positions_.row(static_cast<Eigen::Index>(a)).data();
  const double* pb = positions_.row(static_cast<Eigen::Index>(b)).data();
  if (torus_side_) return core::torus_sq_dist(pa, pb, dim(), *torus_side_);
  return core::euclid_sq_dist(pa, pb, dim());
}

void GeometricGraph::label_components() {
  const std::size_t n = size();
  const int d = dim();
  const double r_sq = r_ * r_;
  UnionFind uf(n);

  // scan the 3^d neighborhood of each node's cell; pair (i < j) checked once
  for (std::size_t i = 0; i < n; ++i) {
    const double* pi = positions_.row(static_cast<Eigen::Index>(i)).data();
    int base[4] = {0, 0, 0, 0};
    for (int k = 0; k < d; ++k)
      base[k] = static_cast<int>(std::floor(pi[k] / cell_side_));
    int offsets = 1;
    for (int k = 0; k < d; ++k) offsets *= 3;
    for (int o = 0; o < offsets; ++o) {
      int c[4] = {0, 0, 0, 0};
      int rem = o;
      for (int k = 0; k < d; ++k) {
        c[k] = base[k] + (rem % 3) - 1;
        rem /= 3;
        if (torus_side_) {
          c[k] %= cells_per_axis_;
          if (c[k] < 0) c[k] += cells_per_axis_;
        }
      }
      const auto it = cells_.find(pack_cell(c, d));
      if (it == cells_.end()) continue;
      for (const std::uint32_t j : it->second) {
        if (j <= i) continue;
        if (sq_dist(i, j) <= r_sq)
          uf.unite(static_cast<std::uint32_t>(i), j);
      }
    }
  }

  labels_.assign(n, -1);
  component_sizes_.clear();
  std::unordered_map<std::uint32_t, int> root_to_label;
  root_to_label.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t root = uf.find(static_cast<std::uint32_t>(i));
    auto [it, inserted] =
        root_to_label.emplace(root, static_cast<int>(component_sizes_.size()));
    if (inserted) component_sizes_.push_back(0);
    labels_[i] = it->second;
    ++component_sizes_[static_cast<std::size_t>(it->second)];
  }
}

std::vector<std::size_t> GeometricGraph::nodes_near(const core::Point& p,
                                                    double dist) const {
  std::vector<std::size_t> out;
  const int d = dim();
  const double dist_sq = dist * dist;
  const int reach = static_cast<int>(std::ceil(dist / cell_side_));
  int base[4] = {0, 0, 0, 0};
  for (int k = 0; k < d; ++k)
    base[k] = static_cast<int>(std::floor(p[k] / cell_side_));
  const int width = 2 * reach + 1;
  int offsets = 1;
  for (int k = 0; k < d; ++k) offsets *= width;
  for (int o = 0; o < offsets; ++o) {
    int c[4] = {0, 0, 0, 0};
    int rem = o;
    for (int k = 0; k < d; ++k) {
      c[k] = base[k] + (rem % width) - reach;
      rem /= width;
      if (torus_side_) {
        c[k] %= cells_per_axis_;
        if (c[k] < 0) c[k] += cells_per_axis_;
      }
    }
    const auto it = cells_.find(pack_cell(c, d));
    if (it == cells_.end()) continue;
    for (const std::uint32_t j : it->second) {
      const double* pj = positions_.row(j).data();
      const double sq = torus_side_
                            ? core::torus_sq_dist(p.data(), pj, d, *torus_side_)
                            : core::euclid_sq_dist(p.data(), pj, d);
      if (sq <= dist_sq) out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

GeometricGraph build_graph(const core::NodeEnsemble& ensemble, double r,
                           const core::DomainSpec& domain) {
  std::optional<double> side;
  if (domain.kind == core::DomainKind::Torus) side = domain.side;
  return GeometricGraph(ensemble.positions, r, side);
}

std::vector<int> crossing_component_ids(const GeometricGraph& graph,
                                        double cube_side) {
  const std::size_t n = graph.size();
  const int d = graph.dim();
  std::vector<int> out;
  if (n == 0) return out;
  const double half = cube_side / 2.0;
  const double r = graph.radius();

  // per component, a bit per face: 2k = lower face of axis k, 2k+1 = upper
  std::vector<std::uint32_t> face_mask(graph.component_count(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = graph.positions().row(static_cast<Eigen::Index>(i));
    for (int k = 0; k < d; ++k) {
      if (row[k] <= -half + r) face_mask[graph.component_of(i)] |= 1u << (2 * k);
      if (row[k] >= half - r) face_mask[graph.component_of(i)] |= 1u << (2 * k + 1);
    }
  }
  const std::uint32_t all = (1u << (2 * d)) - 1;
  for (std::size_t comp = 0; comp < face_mask.size(); ++comp)
    if (face_mask[comp] == all) out.push_back(static_cast<int>(comp));
  return out;
}

CrossingReport crossing_component(const GeometricGraph& graph,
                                  double cube_side) {
  CrossingReport rep;
  const auto ids = crossing_component_ids(graph, cube_side);
  rep.exists = !ids.empty();
  rep.unique = ids.size() == 1;
  if (!rep.exists) return rep;
  int best = ids.front();
  for (const int comp : ids)
    if (graph.component_size(comp) > graph.component_size(best) ||
        (graph.component_size(comp) == graph.component_size(best) && comp < best))
      best = comp;
  rep.component_id = best;
  rep.member_count = graph.component_size(best);
  return rep;
}

namespace {

// Exact maximum pairwise circular distance of coords on [0, side). For each
// point the circularly farthest other point neighbors (x + side/2) mod side
// in sorted order, including the wrap between last and first.
double max_circular_pair_dist(std::vector<double>& coords, double side) {
  std::sort(coords.begin(), coords.end());
  double best = 0.0;
  const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(coords.size());
  for (std::ptrdiff_t i = 0; i < k; ++i) {
    const double target = std::fmod(coords[static_cast<std::size_t>(i)] + side / 2.0, side);
    const std::ptrdiff_t at =
        std::lower_bound(coords.begin(), coords.end(), target) - coords.begin();
    for (std::ptrdiff_t probe = at - 1; probe <= at; ++probe) {
      std::ptrdiff_t j = (probe % k + k) % k;
      best = std::max(best, core::torus_coord_delta(
                                coords[static_cast<std::size_t>(i)],
                                coords[static_cast<std::size_t>(j)], side));
    }
  }
  return best;
}

}  // namespace

CrossingReport giant_component(const GeometricGraph& graph) {
  if (!graph.torus_side())
    throw std::invalid_argument("giant_component: torus domains only");
  const double side = *graph.torus_side();
  const double threshold = side / 4.0;
  const int d = graph.dim();

  CrossingReport rep;
  std::vector<std::vector<std::size_t>> members(graph.component_count());
  for (std::size_t i = 0; i < graph.size(); ++i)
    members[graph.component_of(i)].push_back(i);

  int best = -1;
  std::size_t hits = 0;
  for (std::size_t comp = 0; comp < members.size(); ++comp) {
    const auto& m = members[comp];
    if (m.size() < 2) continue;
    double axis_max_sq_sum = 0.0;
    bool giant = false;
    for (int k = 0; k < d && !giant; ++k) {
      std::vector<double> coords(m.size());
      for (std::size_t j = 0; j < m.size(); ++j)
        coords[j] = graph.positions()(static_cast<Eigen::Index>(m[j]), k);
      const double axis_max = max_circular_pair_dist(coords, side);
      if (axis_max > threshold) giant = true;
      axis_max_sq_sum += axis_max * axis_max;
    }
    if (!giant && std::sqrt(axis_max_sq_sum) > threshold) {
      // per-axis bounds inconclusive; settle exactly
      for (std::size_t a = 0; a < m.size() && !giant; ++a)
        for (std::size_t b = a + 1; b < m.size(); ++b)
          if (graph.sq_dist(m[a], m[b]) > threshold * threshold) {
            giant = true;
            break;
          }
    }
    if (giant) {
      ++hits;
      if (best < 0 || m.size() > members[static_cast<std::size_t>(best)].size())
        best = static_cast<int>(comp);
    }
  }
  rep.exists = hits > 0;
  rep.unique = hits == 1;
  if (rep.exists) {
    rep.component_id = best;
    rep.member_count = graph.component_size(best);
  }
  return rep;
}

std::optional<int> component_of_target(const GeometricGraph& graph,
                                       const core::Point& point) {
  const auto near = graph.nodes_near(point, graph.radius());
  if (near.empty()) return std::nullopt;
  int best = -1;
  for (const std::size_t i : near) {
    const int comp = graph.component_of(i);
    if (best < 0 || graph.component_size(comp) > graph.component_size(best) ||
        (graph.component_size(comp) == graph.component_size(best) && comp < best))
      best = comp;
  }
  return best;
}

}  // namespace mobigg::graph
