#include "mobigg/coverage/target_set.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "mobigg/core/stats.hpp"

namespace mobigg::coverage {

namespace {

// 1-d net for an interval [a, b] at spacing <= 2*eps (endpoints included).
std::vector<double> interval_net(double a, double b, double eps) {
  const double len = b - a;
  const std::size_t segments =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / (2.0 * eps))));
  std::vector<double> out;
  out.reserve(segments + 1);
  for (std::size_t i = 0; i <= segments; ++i)
    out.push_back(a + len * static_cast<double>(i) / static_cast<double>(segments));
  return out;
}

// Middle-thirds iterate: closed intervals of [0, 1] at the given level.
std::vector<std::pair<double, double>> cantor_intervals(int level) {
  std::vector<std::pair<double, double>> cur{{0.0, 1.0}};
  for (int l = 0; l < level; ++l) {
    std::vector<std::pair<double, double>> next;
    next.reserve(cur.size() * 2);
    for (const auto& [a, b] : cur) {
      const double third = (b - a) / 3.0;
      next.emplace_back(a, a + third);
      next.emplace_back(b - third, b);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

core::Box TargetSet::bounding_box() const {
  if (size() == 0) throw std::invalid_argument("TargetSet: empty net");
  core::Point lo = points.colwise().minCoeff();
  core::Point hi = points.colwise().maxCoeff();
  return core::Box(std::move(lo), std::move(hi));
}

TargetSet build_target(TargetKind kind, int d, double R, double epsilon,
                       int cantor_level, const TargetParams& params) {
  if (d < 1 || d > 4) throw std::invalid_argument("build_target: d in 1..4");
  if (epsilon <= 0 && kind != TargetKind::Point)
    throw std::invalid_argument("build_target: epsilon must be > 0");
  if (R <= 0) throw std::invalid_argument("build_target: R must be > 0");

  TargetSet set;
  set.kind = kind;
  set.scale = R;
  set.cantor_level = cantor_level;

  switch (kind) {
    case TargetKind::Point: {
      set.points = core::PointMatrix::Zero(1, d);
      set.epsilon = 0.0;  // the net is the set
      return set;
    }
    case TargetKind::Segment: {
      const auto xs = interval_net(-R / 2.0, R / 2.0, epsilon);
      if (xs.size() > params.net_cap)
        throw std::invalid_argument("build_target: net size over cap");
      set.points = core::PointMatrix::Zero(static_cast<Eigen::Index>(xs.size()), d);
      for (std::size_t i = 0; i < xs.size(); ++i)
        set.points(static_cast<Eigen::Index>(i), 0) = xs[i];
      set.epsilon = epsilon;
      return set;
    }
    case TargetKind::Cube: {
      // grid spacing 2*eps/sqrt(d) so the farthest set point is within eps
      const double spacing = 2.0 * epsilon / std::sqrt(static_cast<double>(d));
      const std::size_t per_axis =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(R / spacing))) + 1;
      double total = 1;
      for (int k = 0; k < d; ++k) total *= static_cast<double>(per_axis);
      if (total > static_cast<double>(params.net_cap))
        throw std::invalid_argument("build_target: net size over cap");
      const std::size_t n = static_cast<std::size_t>(total);
      set.points.resize(static_cast<Eigen::Index>(n), d);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t rem = i;
        for (int k = 0; k < d; ++k) {
          const std::size_t idx = rem % per_axis;
          rem /= per_axis;
          set.points(static_cast<Eigen::Index>(i), k) =
              -R / 2.0 + R * static_cast<double>(idx) /
                             static_cast<double>(per_axis - 1);
        }
      }
      set.epsilon = epsilon;
      return set;
    }
    case TargetKind::CantorIterate: {
      if (cantor_level < 0 || d > 2)
        throw std::invalid_argument("build_target: cantor needs d in {1,2}, level >= 0");
      const auto intervals = cantor_intervals(cantor_level);
      std::vector<double> xs;
      for (const auto& [a, b] : intervals) {
        const auto sub = interval_net(a * R, b * R, epsilon);
        xs.insert(xs.end(), sub.begin(), sub.end());
      }
      const std::size_t n1 = xs.size();
      const std::size_t n = d == 1 ? n1 : n1 * n1;
      if (n > params.net_cap)
        throw std::invalid_argument("build_target: net size over cap");
      set.points.resize(static_cast<Eigen::Index>(n), d);
      if (d == 1) {
        for (std::size_t i = 0; i < n1; ++i)
          set.points(static_cast<Eigen::Index>(i), 0) = xs[i];
      } else {
        for (std::size_t i = 0; i < n1; ++i)
          for (std::size_t j = 0; j < n1; ++j) {
            const auto row = static_cast<Eigen::Index>(i * n1 + j);
            set.points(row, 0) = xs[i];
            set.points(row, 1) = xs[j];
          }
      }
      set.epsilon = epsilon;
      return set;
    }
    case TargetKind::Custom:
      throw std::invalid_argument("build_target: use custom_target for Custom");
  }
  throw std::invalid_argument("build_target: unknown kind");
}

TargetSet custom_target(core::PointMatrix points, double epsilon) {
  if (points.rows() == 0) throw std::invalid_argument("custom_target: empty");
  if (epsilon < 0) throw std::invalid_argument("custom_target: epsilon >= 0");
  TargetSet set;
  set.kind = TargetKind::Custom;
  set.points = std::move(points);
  set.epsilon = epsilon;
  set.scale = 1.0;
  return set;
}

std::size_t box_count(const TargetSet& set, double box_side) {
  if (box_side <= 0) throw std::invalid_argument("box_count: side must be > 0");
  const core::Box bbox = set.bounding_box();
  const int d = set.dim();
  std::unordered_set<std::uint64_t> occupied;
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::uint64_t key = 0;
    for (int k = 0; k < d; ++k) {
      const auto idx = static_cast<std::uint64_t>(
          std::floor((set.points(static_cast<Eigen::Index>(i), k) - bbox.lo[k]) /
                     box_side));
      key = key * 0x100000001B3ULL + idx + 1;
    }
    occupied.insert(key);
  }
  return occupied.size();
}

double box_dimension_estimate(const TargetSet& set,
                              const std::vector<double>& sides) {
  if (sides.size() < 2)
    throw std::invalid_argument("box_dimension_estimate: need >= 2 scales");
  std::vector<double> x, y;
  for (const double s : sides) {
    x.push_back(std::log(1.0 / s));
    y.push_back(std::log(static_cast<double>(box_count(set, s))));
  }
  return core::linear_fit(x, y).slope;
}

std::size_t packing_number(const TargetSet& set, double eps) {
  if (eps <= 0) throw std::invalid_argument("packing_number: eps must be > 0");
  const double min_sq = 4.0 * eps * eps;  // disjoint balls: centers > 2 eps apart
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double* p = set.points.row(static_cast<Eigen::Index>(i)).data();
    bool ok = true;
    for (const std::size_t j : chosen) {
      if (core::euclid_sq_dist(p, set.points.row(static_cast<Eigen::Index>(j)).data(),
                               set.dim()) < min_sq) {
        ok = false;
        break;
      }
    }
    if (ok) chosen.push_back(i);
  }
  return chosen.size();
}

}  // namespace mobigg::coverage
