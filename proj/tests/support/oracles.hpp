#pragma once

// Reference implementations written independently of the library code
// paths they check. Slow and simple on purpose.

#include <span>
#include <vector>

#include "runscape/route_engine.hpp"
#include "runscape/street_graph.hpp"

namespace oracles {

using namespace runscape;

/// Standalone haversine (own constants and formula arrangement).
double haversine(double lat1, double lon1, double lat2, double lon2);
double polyline_length(std::span<const LatLon> line);

/// Distance from p to a polyline via along-track/cross-track bearings.
double cross_track_distance_m(const LatLon& p, std::span<const LatLon> line);

/// Distance from p to a polyline by scanning a 0.25 m densification.
double densified_distance_m(const LatLon& p, std::span<const LatLon> line);

/// Node-to-node Dijkstra over both directions of every segment, with edge
/// cost length * cpm[segment]. Returns +inf when unreachable.
double dijkstra_cost(const StreetGraph& g, const std::vector<double>& cpm, NodeId from, NodeId to);

/// Steps chain end-to-start, and the loop ends where it began.
bool is_closed_loop(const StreetGraph& g, const Route& r, double tol_m = 1e-6);

/// Nearest segment by exhaustive scan (lowest id on ties); -1 if none within radius.
long long brute_force_nearest(const StreetGraph& g, const LatLon& p, double radius_m);

}  // namespace oracles
