#pragma once

#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "runscape/point_index.hpp"
#include "runscape/route_engine.hpp"
#include "runscape/sensory_scores.hpp"

namespace runscape {

inline constexpr double kAnalysisBufferM = 25.0;
inline constexpr int kDefaultMinTagCount = 20;  // desk-scale; the London corpus used 1500
inline constexpr double kDefaultTagSmoothing = 1.0;

struct QueryPoint {
  LatLon pos;
  std::string label;
};

/// CSV columns lat, lon, label (label optional).
std::vector<QueryPoint> read_query_points_csv(std::istream& in);

struct RoutePair {
  QueryPoint query;
  Route scenic;
  Route urban;
};

struct BatchResult {
  std::vector<RoutePair> pairs;
  int skipped = 0;
  std::vector<std::string> failures;  // one message per skipped query point
};

struct BatchOptions {
  double target_length_m = 5000.0;
  int k_headings = 8;
  double length_tolerance = 0.20;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Scenic and urban loops for every query point; points where either
/// profile fails are skipped. Throws BatchError when nothing succeeds.
BatchResult coverage_batch(const RouteEngine& engine, std::span<const QueryPoint> points, const BatchOptions& options);

/// Points within `width_m` (great-circle) of a route polyline.
class RouteBuffer {
 public:
  RouteBuffer(std::vector<LatLon> polyline, double width_m);

  bool contains(const LatLon& p) const;
  double width_m() const noexcept { return width_m_; }
  std::span<const LatLon> polyline() const noexcept { return polyline_; }

 private:
  std::vector<LatLon> polyline_;
  double width_m_;
};

RouteBuffer route_buffer(const Route& route, double width_m = kAnalysisBufferM);  // throws ValidationError

/// Geotag records behind a point index, for buffer queries.
class TagCorpus {
 public:
  TagCorpus() = default;
  explicit TagCorpus(std::vector<GeoTagRecord> records);

  std::span<const GeoTagRecord> records() const noexcept { return records_; }
  std::vector<std::size_t> inside(const RouteBuffer& buffer) const;

 private:
  std::vector<GeoTagRecord> records_;
  PointIndex index_;
};

struct TagCounts {
  std::map<std::string, int> counts;
  int total = 0;
};

TagCounts tag_counts(const RouteBuffer& buffer, const TagCorpus& corpus);

struct TagFrequencies {
  std::map<std::string, double> freq;
  bool empty_buffer = false;
};

TagFrequencies tag_frequencies(const Route& route, const TagCorpus& corpus, double width_m = kAnalysisBufferM);
TagFrequencies to_frequencies(const TagCounts& counts);

struct PairTagCounts {
  TagCounts scenic;
  TagCounts urban;
};

/// Occurrences of `tag` over every route of every pair.
int total_tag_count(std::span<const PairTagCounts> pairs, const std::string& tag);

struct ImportanceTerms {
  double scenic_mean_freq = 0.0;
  double urban_mean_freq = 0.0;
  double pseudo_freq = 0.0;  // smoothing added to both means
  int total_count = 0;
  double ratio = 1.0;
};

/// Mean scenic relative frequency over mean urban relative frequency, each
/// smoothed by `smoothing` pseudo-occurrences over the pooled tag total.
/// Throws ExcludedTagError unless the tag occurs more than `min_count` times.
ImportanceTerms importance_terms(std::span<const PairTagCounts> pairs, const std::string& tag, int min_count,
                                 double smoothing = kDefaultTagSmoothing);
double importance(std::span<const PairTagCounts> pairs, const std::string& tag, int min_count,
                  double smoothing = kDefaultTagSmoothing);

struct ImportanceEntry {
  std::string tag;
  int total_count = 0;
  double scenic_mean_freq = 0.0;
  double urban_mean_freq = 0.0;
  double importance = 1.0;
};

struct ImportanceReport {
  std::vector<ImportanceEntry> entries;  // importance descending, then tag
  int min_count = 0;
  double smoothing = kDefaultTagSmoothing;
  bool empty() const noexcept { return entries.empty(); }
};

std::vector<PairTagCounts> pair_tag_counts(std::span<const RoutePair> pairs, const TagCorpus& corpus,
                                           double width_m = kAnalysisBufferM);

ImportanceReport importance_report(std::span<const PairTagCounts> pairs, int min_count,
                                   double smoothing = kDefaultTagSmoothing);
ImportanceReport importance_report(std::span<const RoutePair> pairs, const TagCorpus& corpus, int min_count,
                                   double smoothing = kDefaultTagSmoothing, double width_m = kAnalysisBufferM);

/// tag,count,scenic_mean_freq,urban_mean_freq,importance
std::string report_to_csv(const ImportanceReport& report);
nlohmann::json report_to_json(const ImportanceReport& report);
nlohmann::json pairs_to_geojson(std::span<const RoutePair> pairs);

/// Shortest round-trip text form of a double.
std::string format_double(double v);

}  // namespace runscape
