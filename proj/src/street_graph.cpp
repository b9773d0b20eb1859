#include "runscape/street_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/box.hpp>
#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "runscape/errors.hpp"

namespace runscape {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

using BgPoint = bg::model::point<double, 2, bg::cs::cartesian>;  // (lon, lat)
using BgBox = bg::model::box<BgPoint>;
using BoxEntry = std::pair<BgBox, std::size_t>;

struct SpatialIndex {
  bgi::rtree<BoxEntry, bgi::quadratic<16>> tree;
};

std::string_view to_string(Surface s) noexcept {
  switch (s) {
    case Surface::grass: return "grass";
    case Surface::pavement: return "pavement";
    case Surface::sand: return "sand";
    case Surface::park_path: return "park_path";
    case Surface::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(WayClass w) noexcept {
  switch (w) {
    case WayClass::low_traffic: return "low_traffic";
    case WayClass::high_traffic: return "high_traffic";
    case WayClass::extreme_traffic: return "extreme_traffic";
  }
  return "low_traffic";
}

Surface parse_surface(std::string_view s) {
  for (Surface v : {Surface::grass, Surface::pavement, Surface::sand, Surface::park_path, Surface::unknown})
    if (to_string(v) == s) return v;
  throw FormatError("unknown surface '" + std::string(s) + "'");
}

WayClass parse_way_class(std::string_view s) {
  for (WayClass v : {WayClass::low_traffic, WayClass::high_traffic, WayClass::extreme_traffic})
    if (to_string(v) == s) return v;
  throw FormatError("unknown way_class '" + std::string(s) + "'");
}

StreetGraph StreetGraph::build(std::vector<Node> nodes, std::vector<Segment> segments) {
  StreetGraph g;
  g.nodes_ = std::move(nodes);
  g.segments_ = std::move(segments);

  for (std::size_t i = 0; i < g.nodes_.size(); ++i) {
    const Node& n = g.nodes_[i];
    if (!is_valid(n.pos)) throw FormatError("node " + std::to_string(n.id) + " has invalid coordinates");
    if (!g.node_lookup_.emplace(n.id, i).second)
      throw FormatError("duplicate node id " + std::to_string(n.id));
  }

  std::vector<std::size_t> degree(g.nodes_.size(), 0);
  for (std::size_t i = 0; i < g.segments_.size(); ++i) {
    Segment& s = g.segments_[i];
    if (!g.segment_lookup_.emplace(s.id, i).second)
      throw FormatError("duplicate segment id " + std::to_string(s.id));
    auto from = g.node_lookup_.find(s.from_node);
    auto to = g.node_lookup_.find(s.to_node);
    if (from == g.node_lookup_.end() || to == g.node_lookup_.end())
      throw FormatError("segment " + std::to_string(s.id) + " references a missing node");
    if (s.polyline.size() < 2) throw FormatError("segment " + std::to_string(s.id) + " has fewer than 2 points");
    s.polyline.front() = g.nodes_[from->second].pos;
    s.polyline.back() = g.nodes_[to->second].pos;
    s.length_m = polyline_length_m(s.polyline);
    if (!(s.length_m > 0.0)) throw FormatError("segment " + std::to_string(s.id) + " has zero length");
    if (s.sidewalk_count < 0 || s.sidewalk_count > 2)
      throw FormatError("segment " + std::to_string(s.id) + " sidewalk_count outside 0..2");
    if (s.signal_count < 0) throw FormatError("segment " + std::to_string(s.id) + " has negative signal_count");
    ++degree[from->second];
    ++degree[to->second];
  }

  g.arc_offsets_.assign(g.nodes_.size() + 1, 0);
  for (std::size_t i = 0; i < degree.size(); ++i) g.arc_offsets_[i + 1] = g.arc_offsets_[i] + degree[i];
  g.arcs_.resize(g.arc_offsets_.back());
  std::vector<std::size_t> fill(g.arc_offsets_.begin(), g.arc_offsets_.end() - 1);
  for (std::size_t i = 0; i < g.segments_.size(); ++i) {
    const std::size_t a = g.node_lookup_.at(g.segments_[i].from_node);
    const std::size_t b = g.node_lookup_.at(g.segments_[i].to_node);
    g.arcs_[fill[a]++] = Arc{i, b, true};
    g.arcs_[fill[b]++] = Arc{i, a, false};
  }

  std::vector<BoxEntry> boxes;
  boxes.reserve(g.segments_.size());
  for (std::size_t i = 0; i < g.segments_.size(); ++i) {
    const auto& line = g.segments_[i].polyline;
    double min_lon = line[0].lon, max_lon = line[0].lon, min_lat = line[0].lat, max_lat = line[0].lat;
    for (const LatLon& p : line) {
      min_lon = std::min(min_lon, p.lon);
      max_lon = std::max(max_lon, p.lon);
      min_lat = std::min(min_lat, p.lat);
      max_lat = std::max(max_lat, p.lat);
    }
    boxes.emplace_back(BgBox(BgPoint(min_lon, min_lat), BgPoint(max_lon, max_lat)), i);
  }
  auto index = std::make_shared<SpatialIndex>();
  index->tree = decltype(index->tree)(boxes.begin(), boxes.end());
  g.spatial_ = std::move(index);
  return g;
}

std::size_t StreetGraph::node_index(NodeId id) const {
  auto it = node_lookup_.find(id);
  if (it == node_lookup_.end()) throw UnknownKeyError("unknown node id " + std::to_string(id));
  return it->second;
}

std::size_t StreetGraph::segment_index(SegmentId id) const {
  auto it = segment_lookup_.find(id);
  if (it == segment_lookup_.end()) throw UnknownKeyError("unknown segment id " + std::to_string(id));
  return it->second;
}

std::optional<std::size_t> StreetGraph::find_segment(SegmentId id) const noexcept {
  auto it = segment_lookup_.find(id);
  if (it == segment_lookup_.end()) return std::nullopt;
  return it->second;
}

std::span<const Arc> StreetGraph::arcs_from(std::size_t node_index) const noexcept {
  return std::span<const Arc>(arcs_).subspan(arc_offsets_[node_index],
                                             arc_offsets_[node_index + 1] - arc_offsets_[node_index]);
}

std::vector<std::size_t> StreetGraph::segments_near(const LatLon& p, double radius_m) const {
  std::vector<std::size_t> out;
  if (!spatial_) return out;
  // Pad slightly so the box stays conservative against the sphere.
  const double dlat = meters_to_lat_deg(radius_m) * 1.01 + 1e-9;
  const double dlon = meters_to_lon_deg(radius_m, std::abs(p.lat) + dlat) * 1.01 + 1e-9;
  const BgBox query(BgPoint(p.lon - dlon, p.lat - dlat), BgPoint(p.lon + dlon, p.lat + dlat));
  std::vector<BoxEntry> hits;
  spatial_->tree.query(bgi::intersects(query), std::back_inserter(hits));
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.second);
  std::sort(out.begin(), out.end());
  return out;
}

SegmentLocation snap_point(const StreetGraph& graph, double lat, double lon, double max_radius_m) {
  const LatLon p{lat, lon};
  if (!is_valid(p)) throw NoSnapError("invalid coordinates");
  const Segment* best = nullptr;
  PolylineProjection best_proj;
  for (std::size_t idx : graph.segments_near(p, max_radius_m)) {
    const Segment& s = graph.segments()[idx];
    const PolylineProjection proj = project_onto_polyline(p, s.polyline);
    if (proj.distance_m > max_radius_m) continue;
    if (!best || proj.distance_m < best_proj.distance_m ||
        (proj.distance_m == best_proj.distance_m && s.id < best->id)) {
      best = &s;
      best_proj = proj;
    }
  }
  if (!best)
    throw NoSnapError("no segment within " + std::to_string(max_radius_m) + " m of (" + std::to_string(lat) +
                      ", " + std::to_string(lon) + ")");
  return {best->id, std::clamp(best_proj.offset_m, 0.0, best->length_m), best_proj.point};
}

SegmentLocation location_at_node(const StreetGraph& graph, NodeId node) {
  const std::size_t ni = graph.node_index(node);
  const Segment* best = nullptr;
  bool at_start = true;
  for (const Arc& arc : graph.arcs_from(ni)) {
    const Segment& s = graph.segments()[arc.segment];
    if (!best || s.id < best->id) {
      best = &s;
      at_start = s.from_node == node;
    }
  }
  if (!best) throw NoSnapError("node " + std::to_string(node) + " has no incident segment");
  return {best->id, at_start ? 0.0 : best->length_m, graph.nodes()[ni].pos};
}

bool is_excluded(const Segment& s) noexcept {
  return s.way_class == WayClass::extreme_traffic ||
         (s.way_class == WayClass::high_traffic && s.sidewalk_count == 0);
}

StreetGraph filter_excluded(const StreetGraph& graph) {
  std::vector<Segment> kept;
  std::set<NodeId> used;
  for (const Segment& s : graph.segments()) {
    if (is_excluded(s)) continue;
    kept.push_back(s);
    used.insert(s.from_node);
    used.insert(s.to_node);
  }
  if (kept.empty()) throw EmptyGraphError("no routable segment survives exclusion");
  std::vector<Node> nodes;
  for (const Node& n : graph.nodes())
    if (used.count(n.id)) nodes.push_back(n);
  return StreetGraph::build(std::move(nodes), std::move(kept));
}

}  // namespace runscape
