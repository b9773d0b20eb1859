#include "runscape/geo.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace runscape {
namespace {

using Vec3 = std::array<double, 3>;

Vec3 to_unit(const LatLon& p) noexcept {
  const double lat = deg_to_rad(p.lat);
  const double lon = deg_to_rad(p.lon);
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

LatLon from_unit(const Vec3& v) noexcept {
  const double lat = std::atan2(v[2], std::hypot(v[0], v[1]));
  const double lon = std::atan2(v[1], v[0]);
  return {rad_to_deg(lat), rad_to_deg(lon)};
}

double dot(const Vec3& a, const Vec3& b) noexcept { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }

// Angle between two unit vectors, accurate for tiny and near-pi angles.
double angle(const Vec3& a, const Vec3& b) noexcept { return std::atan2(norm(cross(a, b)), dot(a, b)); }

}  // namespace

bool is_valid(const LatLon& p) noexcept {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

double haversine_m(const LatLon& a, const LatLon& b) noexcept {
  const double lat1 = deg_to_rad(a.lat);
  const double lat2 = deg_to_rad(b.lat);
  const double dlat = lat2 - lat1;
  const double dlon = deg_to_rad(b.lon - a.lon);
  const double s = std::sin(dlat / 2.0);
  const double t = std::sin(dlon / 2.0);
  const double h = s * s + std::cos(lat1) * std::cos(lat2) * t * t;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double polyline_length_m(std::span<const LatLon> line) noexcept {
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) total += haversine_m(line[i - 1], line[i]);
  return total;
}

LatLon destination_point(const LatLon& origin, double bearing_rad, double distance_m) noexcept {
  const double delta = distance_m / kEarthRadiusM;
  const double lat1 = deg_to_rad(origin.lat);
  const double lon1 = deg_to_rad(origin.lon);
  const double lat2 = std::asin(std::sin(lat1) * std::cos(delta) +
                                std::cos(lat1) * std::sin(delta) * std::cos(bearing_rad));
  const double lon2 =
      lon1 + std::atan2(std::sin(bearing_rad) * std::sin(delta) * std::cos(lat1),
                        std::cos(delta) - std::sin(lat1) * std::sin(lat2));
  double lon = rad_to_deg(lon2);
  if (lon > 180.0) lon -= 360.0;
  if (lon < -180.0) lon += 360.0;
  return {rad_to_deg(lat2), lon};
}

PolylineProjection project_onto_arc(const LatLon& p, const LatLon& a, const LatLon& b) noexcept {
  const Vec3 pa = to_unit(a);
  const Vec3 pb = to_unit(b);
  const Vec3 pp = to_unit(p);
  const Vec3 n = cross(pa, pb);
  const double nlen = norm(n);

  const double da = haversine_m(p, a);
  if (nlen < 1e-15) return {da, 0.0, a};

  const Vec3 nu = {n[0] / nlen, n[1] / nlen, n[2] / nlen};
  const double off_plane = dot(pp, nu);
  const Vec3 c = {pp[0] - off_plane * nu[0], pp[1] - off_plane * nu[1], pp[2] - off_plane * nu[2]};
  const double clen = norm(c);
  if (clen > 1e-15) {
    const Vec3 cu = {c[0] / clen, c[1] / clen, c[2] / clen};
    // cu lies on the minor arc iff it sits between a and b in the plane.
    if (dot(cross(pa, cu), nu) >= 0.0 && dot(cross(cu, pb), nu) >= 0.0) {
      const double d = kEarthRadiusM * std::atan2(std::abs(off_plane), clen);
      return {d, kEarthRadiusM * angle(pa, cu), from_unit(cu)};
    }
  }
  const double db = haversine_m(p, b);
  if (db < da) return {db, haversine_m(a, b), b};
  return {da, 0.0, a};
}

PolylineProjection project_onto_polyline(const LatLon& p, std::span<const LatLon> line) noexcept {
  if (line.empty()) return {};
  if (line.size() == 1) return {haversine_m(p, line[0]), 0.0, line[0]};
  PolylineProjection best;
  bool have = false;
  double walked = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    PolylineProjection cand = project_onto_arc(p, line[i - 1], line[i]);
    cand.offset_m += walked;
    if (!have || cand.distance_m < best.distance_m) {
      best = cand;
      have = true;
    }
    walked += haversine_m(line[i - 1], line[i]);
  }
  best.offset_m = std::clamp(best.offset_m, 0.0, walked);
  return best;
}

double point_to_polyline_m(const LatLon& p, std::span<const LatLon> line) noexcept {
  return project_onto_polyline(p, line).distance_m;
}

LatLon interpolate_along(std::span<const LatLon> line, double offset_m) noexcept {
  if (line.empty()) return {};
  if (offset_m <= 0.0) return line.front();
  double walked = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const double step = haversine_m(line[i - 1], line[i]);
    if (walked + step >= offset_m && step > 0.0) {
      const double f = (offset_m - walked) / step;
      if (f >= 1.0) return line[i];
      if (f <= 0.0) return line[i - 1];
      const Vec3 a = to_unit(line[i - 1]);
      const Vec3 b = to_unit(line[i]);
      const double omega = angle(a, b);
      const double s = std::sin(omega);
      if (s < 1e-15) return line[i - 1];
      const double wa = std::sin((1.0 - f) * omega) / s;
      const double wb = std::sin(f * omega) / s;
      return from_unit({wa * a[0] + wb * b[0], wa * a[1] + wb * b[1], wa * a[2] + wb * b[2]});
    }
    walked += step;
  }
  return line.back();
}

std::vector<LatLon> slice_polyline(std::span<const LatLon> line, double from_m, double to_m) {
  std::vector<LatLon> out;
  if (line.empty()) return out;
  const bool reverse = from_m > to_m;
  const double lo = std::min(from_m, to_m);
  const double hi = std::max(from_m, to_m);

  out.push_back(interpolate_along(line, lo));
  double walked = 0.0;
  for (std::size_t i = 1; i + 1 < line.size(); ++i) {
    walked += haversine_m(line[i - 1], line[i]);
    if (walked > lo && walked < hi) out.push_back(line[i]);
  }
  const LatLon end = interpolate_along(line, hi);
  if (!(end == out.back())) out.push_back(end);
  if (reverse) std::reverse(out.begin(), out.end());
  return out;
}

double meters_to_lat_deg(double meters) noexcept { return rad_to_deg(meters / kEarthRadiusM); }

double meters_to_lon_deg(double meters, double lat) noexcept {
  const double c = std::cos(deg_to_rad(std::min(89.0, std::abs(lat))));
  return rad_to_deg(meters / (kEarthRadiusM * c));
}

}  // namespace runscape
