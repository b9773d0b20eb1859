#pragma once

#include <memory>
#include <span>
#include <vector>

#include "runscape/geo.hpp"

namespace runscape {

struct PointTree;

/// Static R-tree over a point set, queried by great-circle distance to a polyline.
class PointIndex {
 public:
  PointIndex() = default;
  explicit PointIndex(std::vector<LatLon> points);

  std::size_t size() const noexcept { return points_.size(); }
  std::span<const LatLon> points() const noexcept { return points_; }

  /// Indices (ascending) of points within `radius_m` of the polyline.
  std::vector<std::size_t> within(std::span<const LatLon> polyline, double radius_m) const;

 private:
  std::vector<LatLon> points_;
  std::shared_ptr<const PointTree> tree_;
};

}  // namespace runscape
