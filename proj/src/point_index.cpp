#include "runscape/point_index.hpp"

#include <algorithm>
#include <cmath>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/box.hpp>
#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>

namespace runscape {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

using PtPoint = bg::model::point<double, 2, bg::cs::cartesian>;  // (lon, lat)
using PtBox = bg::model::box<PtPoint>;
using PtEntry = std::pair<PtPoint, std::size_t>;

struct PointTree {
  bgi::rtree<PtEntry, bgi::quadratic<16>> tree;
};

PointIndex::PointIndex(std::vector<LatLon> points) : points_(std::move(points)) {
  std::vector<PtEntry> entries;
  entries.reserve(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) entries.emplace_back(PtPoint(points_[i].lon, points_[i].lat), i);
  auto t = std::make_shared<PointTree>();
  t->tree = decltype(t->tree)(entries.begin(), entries.end());
  tree_ = std::move(t);
}

std::vector<std::size_t> PointIndex::within(std::span<const LatLon> polyline, double radius_m) const {
  std::vector<std::size_t> out;
  if (!tree_ || points_.empty() || polyline.empty()) return out;
  double min_lon = polyline[0].lon, max_lon = min_lon, min_lat = polyline[0].lat, max_lat = min_lat;
  for (const LatLon& p : polyline) {
    min_lon = std::min(min_lon, p.lon);
    max_lon = std::max(max_lon, p.lon);
    min_lat = std::min(min_lat, p.lat);
    max_lat = std::max(max_lat, p.lat);
  }
  const double dlat = meters_to_lat_deg(radius_m) * 1.01 + 1e-9;
  const double top = std::max(std::abs(min_lat), std::abs(max_lat)) + dlat;
  const double dlon = meters_to_lon_deg(radius_m, top) * 1.01 + 1e-9;
  const PtBox box(PtPoint(min_lon - dlon, min_lat - dlat), PtPoint(max_lon + dlon, max_lat + dlat));
  for (auto it = tree_->tree.qbegin(bgi::intersects(box)); it != tree_->tree.qend(); ++it)
    if (point_to_polyline_m(points_[it->second], polyline) <= radius_m) out.push_back(it->second);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace runscape
