#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "mobigg/core/domain.hpp"
#include "mobigg/core/ensemble.hpp"
#include "mobigg/core/geometry.hpp"

namespace mobigg::graph {

struct CrossingReport {
  bool exists = false;
  bool unique = false;
  std::optional<int> component_id;
  std::size_t member_count = 0;
};

/// Radius-r adjacency over a fixed set of points, with connected components
/// labeled at construction. Adjacency is implied by the cell list and never
/// materialized as an edge list. Immutable after build.
class GeometricGraph {
 public:
  /// Euclidean metric when torus_side is absent, wrapped metric otherwise.
  GeometricGraph(core::PointMatrix positions, double r,
                 std::optional<double> torus_side = std::nullopt);

  int dim() const { return static_cast<int>(positions_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(positions_.rows()); }
  double radius() const { return r_; }
  std::optional<double> torus_side() const { return torus_side_; }
  const core::PointMatrix& positions() const { return positions_; }

  /// Component label of a node; labels are 0..component_count-1, assigned in
  /// first-member order.
  int component_of(std::size_t node) const { return labels_[node]; }
  const std::vector<int>& labels() const { return labels_; }
  std::size_t component_count() const { return component_sizes_.size(); }
  std::size_t component_size(int comp) const { return component_sizes_[comp]; }

  /// Indices of nodes within dist of the point (metric-aware).
  std::vector<std::size_t> nodes_near(const core::Point& p, double dist) const;

  double sq_dist(std::size_t a, std::size_t b) const;

 private:
  void build_cells();
  void label_components();
  std::uint64_t cell_key_of(const double* p) const;

  core::PointMatrix positions_;
  double r_;
  std::optional<double> torus_side_;
  double cell_side_;
  int cells_per_axis_ = 0;  // torus only
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
  std::vector<int> labels_;
  std::vector<std::size_t> component_sizes_;
};

GeometricGraph build_graph(const core::NodeEnsemble& ensemble, double r,
                           const core::DomainSpec& domain);

/// Does some component touch all 2d faces of the centered cube? A component
/// touches a face when a member's coordinate is within r of the face plane.
CrossingReport crossing_component(const GeometricGraph& graph, double cube_side);

/// Labels of every component that crosses the centered cube.
std::vector<int> crossing_component_ids(const GeometricGraph& graph,
                                        double cube_side);

/// Torus-only: is there a component whose (torus-metric) diameter exceeds
/// side/4? Throws on non-torus graphs.
CrossingReport giant_component(const GeometricGraph& graph);

/// Component owning the target point: among components with a node within r
/// of the point, the one with the most members (ties: smallest label).
std::optional<int> component_of_target(const GeometricGraph& graph,
                                       const core::Point& point);

}  // namespace mobigg::graph
