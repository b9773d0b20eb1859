#pragma once

#include <istream>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "runscape/point_index.hpp"
#include "runscape/street_graph.hpp"

namespace runscape {

struct CrimeRecord {
  LatLon pos;
  std::string category;
  std::string month;  // YYYY-MM
};

inline constexpr double kCrimeBufferM = 200.0;

std::set<std::string> default_person_crime_categories();

/// Spatial index over crimes against a person. Categories are compared as
/// slugs, so "Violence and sexual offences" matches "violence-and-sexual-offences".
class CrimeIndex {
 public:
  CrimeIndex() = default;

  std::size_t size() const noexcept { return index_.size(); }
  std::span<const LatLon> points() const noexcept { return index_.points(); }
  const std::set<std::string>& filter() const noexcept { return filter_; }
  int skipped = 0;  // records dropped for bad coordinates

  /// Crimes whose great-circle distance to the polyline is <= radius_m.
  int count_within(std::span<const LatLon> polyline, double radius_m) const;

 private:
  friend CrimeIndex ingest_crimes(std::span<const CrimeRecord>, const std::set<std::string>&);
  PointIndex index_;
  std::set<std::string> filter_;
};

CrimeIndex ingest_crimes(std::span<const CrimeRecord> records,
                         const std::set<std::string>& filter_categories = default_person_crime_categories());

struct CrimeCsv {
  std::vector<CrimeRecord> records;
  int malformed = 0;
};

/// UK police export shape: Month, Longitude, Latitude, Crime type.
CrimeCsv read_crimes_csv(std::istream& in);

/// Tier scores for the way-type proxy. Extreme traffic never reaches scoring.
struct TrafficTiers {
  double low_traffic = 1.0;
  double high_traffic_with_sidewalk = 0.5;
};

int ground_indicator(const Segment& segment, Surface surface) noexcept;
double obstacle_from(int signal_count) noexcept;
double obstacle_score(const Segment& segment) noexcept;
double traffic_score(const Segment& segment, const TrafficTiers& tiers = {});  // throws ContractError
double safety_from(int crime_count) noexcept;
double safety_score(const Segment& segment, const CrimeIndex& crimes, double buffer_m = kCrimeBufferM);

}  // namespace runscape
