#pragma once

#include <span>
#include <vector>

namespace runscape {

inline constexpr double kEarthRadiusM = 6371008.8;
inline constexpr double kPi = 3.14159265358979323846;

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

bool is_valid(const LatLon& p) noexcept;

double deg_to_rad(double deg) noexcept;
double rad_to_deg(double rad) noexcept;

/// Great-circle distance in meters (haversine form).
double haversine_m(const LatLon& a, const LatLon& b) noexcept;

double polyline_length_m(std::span<const LatLon> line) noexcept;

/// Point reached by travelling `distance_m` from `origin` along the initial
/// compass bearing `bearing_rad` (0 = north, clockwise).
LatLon destination_point(const LatLon& origin, double bearing_rad, double distance_m) noexcept;

struct PolylineProjection {
  double distance_m = 0.0;  // great-circle distance from the query point
  double offset_m = 0.0;    // arc length from the polyline start to `point`
  LatLon point;             // closest point on the polyline
};

/// Closest point on the great-circle arc a-b.
PolylineProjection project_onto_arc(const LatLon& p, const LatLon& a, const LatLon& b) noexcept;

/// Closest point on a polyline. Ties keep the earliest vertex run.
PolylineProjection project_onto_polyline(const LatLon& p, std::span<const LatLon> line) noexcept;

double point_to_polyline_m(const LatLon& p, std::span<const LatLon> line) noexcept;

/// Point at arc-length `offset_m` along the polyline, clamped to its ends.
LatLon interpolate_along(std::span<const LatLon> line, double offset_m) noexcept;

/// Portion of the polyline between two arc-length offsets. When `from_m`
/// exceeds `to_m` the result runs backwards.
std::vector<LatLon> slice_polyline(std::span<const LatLon> line, double from_m, double to_m);

/// Degrees of latitude / longitude spanned by `meters` near `lat`. Used to
/// build conservative search boxes for spatial indices.
double meters_to_lat_deg(double meters) noexcept;
double meters_to_lon_deg(double meters, double lat) noexcept;

}  // namespace runscape
