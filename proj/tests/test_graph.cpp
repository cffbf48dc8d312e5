#include <doctest.h>

#include <cmath>

#include "mobigg/core/rng.hpp"
#include "mobigg/graph/geometric_graph.hpp"
#include "oracles.hpp"

using namespace mobigg;

namespace {

core::PointMatrix points_2d(std::initializer_list<std::pair<double, double>> pts) {
  core::PointMatrix m(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [x, y] : pts) {
    m(i, 0) = x;
    m(i, 1) = y;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("a single node is a single component") {
  core::PointMatrix m(1, 3);
  m.setZero();
  const graph::GeometricGraph g(m, 1.0);
  CHECK(g.component_count() == 1);
  CHECK(g.component_size(0) == 1);
}

TEST_CASE("chain plus outlier splits into the expected components") {
  const auto m = points_2d({{0, 0}, {0.9, 0}, {1.8, 0}, {5, 5}});
  const graph::GeometricGraph g(m, 1.0);
  CHECK(g.component_count() == 2);
  CHECK(g.component_of(0) == g.component_of(1));
  CHECK(g.component_of(1) == g.component_of(2));
  CHECK(g.component_of(3) != g.component_of(0));
}

TEST_CASE("far-apart nodes are all singletons") {
  core::PointMatrix m(6, 2);
  for (int i = 0; i < 6; ++i) {
    m(i, 0) = 10.0 * i;
    m(i, 1) = 0;
  }
  const graph::GeometricGraph g(m, 1.0);
  CHECK(g.component_count() == 6);
}

TEST_CASE("union-find partition equals the BFS oracle on random instances") {
  for (std::size_t instance = 0; instance < 60; ++instance) {
    core::Substream s(instance, 0xFACE, 0);
    const int d = 1 + static_cast<int>(s.next_u64() % 3);
    const bool torus = s.next_unit() < 0.4;
    const double side = 8.0;
    const std::size_t n = 20 + s.next_u64() % 480;
    const double r = 0.4 + s.next_unit();
    core::PointMatrix pts(static_cast<Eigen::Index>(n), d);
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k)
        pts(static_cast<Eigen::Index>(i), k) =
            torus ? s.next_uniform(0.0, side) : s.next_uniform(-side / 2, side / 2);
    std::optional<double> torus_side;
    if (torus) torus_side = side;
    const graph::GeometricGraph g(pts, r, torus_side);
    const auto oracle = test_oracles::bfs_components(pts, r, torus_side);
    CHECK(test_oracles::same_partition(g.labels(), oracle));
  }
}

TEST_CASE("torus adjacency wraps across the seam") {
  // two nodes hugging opposite edges: adjacent only periodically
  core::PointMatrix m(2, 2);
  m << 0.1, 5.0, 9.9, 5.0;
  const graph::GeometricGraph wrapped(m, 0.5, 10.0);
  CHECK(wrapped.component_count() == 1);
  const graph::GeometricGraph flat(m, 0.5);
  CHECK(flat.component_count() == 2);
}

TEST_CASE("crossing requires every face, not just one axis") {
  // horizontal chain through the cube: connects x faces but not y faces
  core::PointMatrix m(11, 2);
  for (int i = 0; i <= 10; ++i) {
    m(i, 0) = -5.0 + i;
    m(i, 1) = 0.0;
  }
  const graph::GeometricGraph g(m, 1.0);
  const auto rep = graph::crossing_component(g, 10.0);
  CHECK_FALSE(rep.exists);
}

TEST_CASE("full grid crosses uniquely") {
  const int lo = -5, hi = 5;
  const int w = hi - lo + 1;
  core::PointMatrix m(static_cast<Eigen::Index>(w) * w, 2);
  Eigen::Index idx = 0;
  for (int x = lo; x <= hi; ++x)
    for (int y = lo; y <= hi; ++y) {
      m(idx, 0) = x;
      m(idx, 1) = y;
      ++idx;
    }
  const graph::GeometricGraph g(m, 1.0);
  const auto rep = graph::crossing_component(g, 10.0);
  CHECK(rep.exists);
  CHECK(rep.unique);
  CHECK(rep.member_count == static_cast<std::size_t>(w) * w);
}

TEST_CASE("empty graph has no crossing and no giant") {
  core::PointMatrix m(0, 2);
  const graph::GeometricGraph g(m, 1.0, 8.0);
  CHECK_FALSE(graph::crossing_component(g, 4.0).exists);
  CHECK_FALSE(graph::giant_component(g).exists);
}

TEST_CASE("adding a node never destroys a crossing") {
  core::Substream s(17, 0, 0);
  for (int instance = 0; instance < 25; ++instance) {
    const double side = 6.0;
    const std::size_t n = 80 + s.next_u64() % 200;
    core::PointMatrix pts(static_cast<Eigen::Index>(n) + 1, 2);
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < 2; ++k)
        pts(static_cast<Eigen::Index>(i), k) = s.next_uniform(-side / 2, side / 2);
    const graph::GeometricGraph before(pts.topRows(static_cast<Eigen::Index>(n)),
                                       1.0);
    if (!graph::crossing_component(before, side).exists) continue;
    for (int k = 0; k < 2; ++k)
      pts(static_cast<Eigen::Index>(n), k) = s.next_uniform(-side / 2, side / 2);
    const graph::GeometricGraph after(pts, 1.0);
    CHECK(graph::crossing_component(after, side).exists);
  }
}

TEST_CASE("giant component detection on the torus") {
  // all nodes inside one small ball: no giant
  core::Substream s(23, 0, 0);
  const double side = 16.0;
  core::PointMatrix clump(40, 2);
  for (int i = 0; i < 40; ++i) {
    clump(i, 0) = 8.0 + s.next_uniform(-0.5, 0.5);
    clump(i, 1) = 8.0 + s.next_uniform(-0.5, 0.5);
  }
  const graph::GeometricGraph g_clump(clump, 2.0, side);
  CHECK_FALSE(graph::giant_component(g_clump).exists);

  // ring around the torus equator spaced r/2: diameter side/2 > side/4
  const double r = 1.0;
  const int count = static_cast<int>(std::ceil(side / (r / 2)));
  core::PointMatrix ring(count, 2);
  for (int i = 0; i < count; ++i) {
    ring(i, 0) = side * i / count;
    ring(i, 1) = 8.0;
  }
  const graph::GeometricGraph g_ring(ring, r, side);
  const auto rep = graph::giant_component(g_ring);
  CHECK(rep.exists);
  CHECK(rep.unique);

  const graph::GeometricGraph g_flat(ring, r);
  CHECK_THROWS_AS(graph::giant_component(g_flat), std::invalid_argument);
}

TEST_CASE("component_of_target picks the nearest component by the tie rule") {
  // point within r of the crossing chain
  const auto chain = points_2d({{-2, 0}, {-1, 0}, {0, 0}, {1, 0}, {2, 0}});
  const graph::GeometricGraph g(chain, 1.0);
  const auto comp = graph::component_of_target(g, Eigen::Vector2d(0.2, 0.5));
  REQUIRE(comp.has_value());
  CHECK(*comp == g.component_of(2));

  // point farther than r from everything
  CHECK_FALSE(graph::component_of_target(g, Eigen::Vector2d(0, 5)).has_value());

  // two singleton nodes exactly within r: the smaller label wins
  const auto two = points_2d({{-0.5, 0}, {0.5, 0}});
  const graph::GeometricGraph g2(two, 0.6);
  REQUIRE(g2.component_count() == 2);
  const auto tie = graph::component_of_target(g2, Eigen::Vector2d(0, 0));
  REQUIRE(tie.has_value());
  CHECK(*tie == std::min(g2.component_of(0), g2.component_of(1)));
}
