#include "runscape/context_scores.hpp"

#include <algorithm>
#include <cmath>

#include "runscape/errors.hpp"
#include "runscape/text.hpp"

namespace runscape {

std::set<std::string> default_person_crime_categories() {
  return {"violent-crime", "violence-and-sexual-offences", "robbery"};
}

CrimeIndex ingest_crimes(std::span<const CrimeRecord> records, const std::set<std::string>& filter_categories) {
  CrimeIndex idx;
  for (const auto& c : filter_categories) idx.filter_.insert(slugify(c));
  std::vector<LatLon> points;
  for (const CrimeRecord& r : records) {
    if (!is_valid(r.pos)) {
      ++idx.skipped;
      continue;
    }
    if (idx.filter_.count(slugify(r.category))) points.push_back(r.pos);
  }
  idx.index_ = PointIndex(std::move(points));
  return idx;
}

int CrimeIndex::count_within(std::span<const LatLon> polyline, double radius_m) const {
  return static_cast<int>(index_.within(polyline, radius_m).size());
}

CrimeCsv read_crimes_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const int month = t.column("Month"), lon = t.column("Longitude"), lat = t.column("Latitude"),
            type = t.column("Crime type");
  if (lon < 0 || lat < 0 || type < 0) throw FormatError("crime CSV needs Longitude, Latitude and Crime type columns");
  CrimeCsv out;
  for (const auto& row : t.rows) {
    const auto need = static_cast<std::size_t>(std::max({lon, lat, type, month}));
    if (row.size() <= need) {
      ++out.malformed;
      continue;
    }
    CrimeRecord r;
    try {
      std::size_t used = 0;
      const std::string& slat = row[static_cast<std::size_t>(lat)];
      const std::string& slon = row[static_cast<std::size_t>(lon)];
      r.pos.lat = std::stod(slat, &used);
      if (used != slat.size()) throw std::invalid_argument("lat");
      r.pos.lon = std::stod(slon, &used);
      if (used != slon.size()) throw std::invalid_argument("lon");
    } catch (const std::exception&) {
      ++out.malformed;
      continue;
    }
    r.category = row[static_cast<std::size_t>(type)];
    if (month >= 0) r.month = row[static_cast<std::size_t>(month)];
    out.records.push_back(std::move(r));
  }
  return out;
}

int ground_indicator(const Segment& segment, Surface surface) noexcept {
  return surface != Surface::unknown && segment.surface == surface ? 1 : 0;
}

double obstacle_from(int signal_count) noexcept { return 1.0 / (1.0 + std::max(0, signal_count)); }

double obstacle_score(const Segment& segment) noexcept { return obstacle_from(segment.signal_count); }

double traffic_score(const Segment& segment, const TrafficTiers& tiers) {
  switch (segment.way_class) {
    case WayClass::low_traffic: return tiers.low_traffic;
    case WayClass::high_traffic:
      if (segment.sidewalk_count > 0) return tiers.high_traffic_with_sidewalk;
      throw ContractError("segment " + std::to_string(segment.id) + " is high traffic without sidewalk");
    case WayClass::extreme_traffic: break;
  }
  throw ContractError("segment " + std::to_string(segment.id) + " carries extreme traffic");
}

double safety_from(int crime_count) noexcept { return 1.0 / (1.0 + std::max(0, crime_count)); }

double safety_score(const Segment& segment, const CrimeIndex& crimes, double buffer_m) {
  return safety_from(crimes.count_within(segment.polyline, buffer_m));
}

}  // namespace runscape
