#pragma once

#include <span>

#include <nlohmann/json.hpp>
#include "runscape/geo.hpp"
#include "runscape/street_graph.hpp"

namespace runscape {

/// [[lon, lat], ...] as GeoJSON wants it.
nlohmann::json line_coordinates(std::span<const LatLon> line);

/// The graph as a FeatureCollection readable by load_segments_geojson.
nlohmann::json segments_to_geojson(const StreetGraph& graph);

}  // namespace runscape
