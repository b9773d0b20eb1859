#include <cmath>
#include <map>

#include <nlohmann/json.hpp>
#include "runscape/errors.hpp"
#include "runscape/geojson.hpp"
#include "runscape/street_graph.hpp"

namespace runscape {

using nlohmann::json;

namespace {

std::pair<std::int64_t, std::int64_t> coord_key(const LatLon& p) {
  return {std::llround(p.lat * 1e7), std::llround(p.lon * 1e7)};
}

std::string where(std::size_t i) { return "feature " + std::to_string(i) + ": "; }

}  // namespace

StreetGraph load_segments_geojson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("GeoJSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw FormatError("GeoJSON: expected a FeatureCollection");

  std::map<std::pair<std::int64_t, std::int64_t>, NodeId> by_coord;
  std::map<NodeId, LatLon> node_pos;
  std::vector<Segment> segments;
  NodeId next_node = 1;

  const json& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& f = features[i];
    if (!f.is_object() || !f.contains("geometry") || !f["geometry"].is_object())
      throw FormatError(where(i) + "missing geometry");
    const json& geom = f["geometry"];
    if (geom.value("type", "") != "LineString") throw FormatError(where(i) + "geometry is not a LineString");
    if (!f.contains("properties") || !f["properties"].is_object())
      throw FormatError(where(i) + "missing properties");
    const json& props = f["properties"];

    Segment s;
    try {
      for (const json& c : geom.at("coordinates")) {
        const LatLon p{c.at(1).get<double>(), c.at(0).get<double>()};
        if (!is_valid(p)) throw FormatError(where(i) + "invalid coordinate");
        s.polyline.push_back(p);
      }
    } catch (const json::exception&) {
      throw FormatError(where(i) + "malformed coordinates");
    }
    if (s.polyline.size() < 2) throw FormatError(where(i) + "LineString needs at least 2 positions");

    for (const char* key : {"surface", "way_class", "sidewalk_count", "signal_count"})
      if (!props.contains(key)) throw FormatError(where(i) + "missing property '" + key + "'");
    try {
      s.surface = parse_surface(props.at("surface").get<std::string>());
      s.way_class = parse_way_class(props.at("way_class").get<std::string>());
      s.sidewalk_count = props.at("sidewalk_count").get<int>();
      s.signal_count = props.at("signal_count").get<int>();
      s.id = props.contains("id") ? props.at("id").get<SegmentId>() : static_cast<SegmentId>(i);
    } catch (const json::exception& e) {
      throw FormatError(where(i) + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where(i) + e.what());
    }

    auto endpoint = [&](const LatLon& p, const char* key) {
      if (props.contains(key)) {
        const NodeId id = props.at(key).get<NodeId>();
        node_pos.emplace(id, p);
        return id;
      }
      auto [it, fresh] = by_coord.emplace(coord_key(p), 0);
      if (fresh) {
        while (node_pos.count(next_node)) ++next_node;
        it->second = next_node++;
        node_pos.emplace(it->second, p);
      }
      return it->second;
    };
    s.from_node = endpoint(s.polyline.front(), "from_node");
    s.to_node = endpoint(s.polyline.back(), "to_node");
    segments.push_back(std::move(s));
  }
  if (segments.empty()) throw EmptyGraphError("GeoJSON contains no segment");

  std::vector<Node> nodes;
  nodes.reserve(node_pos.size());
  for (const auto& [id, pos] : node_pos) nodes.push_back(Node{id, pos});
  return StreetGraph::build(std::move(nodes), std::move(segments));
}

json line_coordinates(std::span<const LatLon> line) {
  json coords = json::array();
  for (const LatLon& p : line) coords.push_back({p.lon, p.lat});
  return coords;
}

json segments_to_geojson(const StreetGraph& graph) {
  json features = json::array();
  for (const Segment& s : graph.segments()) {
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", line_coordinates(s.polyline)}}},
                        {"properties",
                         {{"id", s.id},
                          {"from_node", s.from_node},
                          {"to_node", s.to_node},
                          {"length_m", s.length_m},
                          {"surface", to_string(s.surface)},
                          {"way_class", to_string(s.way_class)},
                          {"sidewalk_count", s.sidewalk_count},
                          {"signal_count", s.signal_count}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace runscape
