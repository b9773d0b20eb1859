#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "runscape/geo.hpp"

namespace runscape {

using NodeId = std::int64_t;
using SegmentId = std::int64_t;

enum class Surface : std::uint8_t { grass, pavement, sand, park_path, unknown };
enum class WayClass : std::uint8_t { low_traffic, high_traffic, extreme_traffic };

inline constexpr Surface kKnownSurfaces[] = {Surface::grass, Surface::pavement, Surface::sand,
                                             Surface::park_path};

std::string_view to_string(Surface s) noexcept;
std::string_view to_string(WayClass w) noexcept;
Surface parse_surface(std::string_view s);     // throws FormatError
WayClass parse_way_class(std::string_view s);  // throws FormatError

struct Node {
  NodeId id = 0;
  LatLon pos;
};

struct Segment {
  SegmentId id = 0;
  NodeId from_node = 0;
  NodeId to_node = 0;
  std::vector<LatLon> polyline;
  double length_m = 0.0;
  Surface surface = Surface::unknown;
  WayClass way_class = WayClass::low_traffic;
  int sidewalk_count = 0;
  int signal_count = 0;
};

// One traversal direction of a segment leaving a node. Every segment is
// walkable both ways, so each contributes two arcs.
struct Arc {
  std::size_t segment = 0;  // segment index
  std::size_t target = 0;   // node index reached
  bool forward = true;      // true when travelling from_node -> to_node
};

struct SegmentLocation {
  SegmentId segment_id = 0;
  double offset_m = 0.0;
  LatLon point;
};

struct SpatialIndex;

/// Immutable routable street network. Segment and node ids are the caller's;
/// algorithms address them through dense indices.
class StreetGraph {
 public:
  StreetGraph() = default;

  /// Validates the records and builds adjacency plus the spatial index.
  /// Throws FormatError on dangling node references or bad coordinates.
  static StreetGraph build(std::vector<Node> nodes, std::vector<Segment> segments);

  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const Segment> segments() const noexcept { return segments_; }
  bool empty() const noexcept { return segments_.empty(); }

  std::size_t node_index(NodeId id) const;        // throws UnknownKeyError
  std::size_t segment_index(SegmentId id) const;  // throws UnknownKeyError
  std::optional<std::size_t> find_segment(SegmentId id) const noexcept;
  const Segment& segment(SegmentId id) const { return segments_[segment_index(id)]; }
  const Node& node(NodeId id) const { return nodes_[node_index(id)]; }

  std::span<const Arc> arcs_from(std::size_t node_index) const noexcept;

  /// Indices of segments whose bounding box comes within `radius_m` of `p`.
  std::vector<std::size_t> segments_near(const LatLon& p, double radius_m) const;

 private:
  std::vector<Node> nodes_;
  std::vector<Segment> segments_;
  std::unordered_map<NodeId, std::size_t> node_lookup_;
  std::unordered_map<SegmentId, std::size_t> segment_lookup_;
  std::vector<std::size_t> arc_offsets_;
  std::vector<Arc> arcs_;
  std::shared_ptr<const SpatialIndex> spatial_;
};

// Tag tables used when turning OSM ways into segments.
struct OsmTagTable {
  std::map<std::string, WayClass> highway;
  std::map<std::string, Surface> surface;
  std::set<std::string> signal_values;  // node highway=* values that count as signals

  static OsmTagTable defaults();
  static OsmTagTable from_json(std::string_view json);  // throws FormatError
};

StreetGraph load_osm(std::istream& source, const OsmTagTable& table = OsmTagTable::defaults());
StreetGraph load_osm_string(std::string_view xml, const OsmTagTable& table = OsmTagTable::defaults());

StreetGraph load_segments_geojson(std::string_view json);

/// Nearest segment within `max_radius_m`; ties go to the lowest segment id.
SegmentLocation snap_point(const StreetGraph& graph, double lat, double lon, double max_radius_m);

/// Location sitting exactly on a node, expressed on its lowest-id incident segment.
SegmentLocation location_at_node(const StreetGraph& graph, NodeId node);

/// Drops extreme-traffic segments and high-traffic segments without a
/// sidewalk, then prunes orphaned nodes.
StreetGraph filter_excluded(const StreetGraph& graph);

bool is_excluded(const Segment& s) noexcept;

}  // namespace runscape
