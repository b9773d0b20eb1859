#include "runscape/route_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "runscape/errors.hpp"
#include "runscape/text.hpp"

namespace runscape {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<QueryPoint> read_query_points_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const int lat = t.column("lat"), lon = t.column("lon"), label = t.column("label");
  if (lat < 0 || lon < 0) throw FormatError("query point CSV needs lat and lon columns");
  std::vector<QueryPoint> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    if (row.size() <= static_cast<std::size_t>(std::max(lat, lon)))
      throw ParseError("query point CSV: short row", t.row_lines[i]);
    QueryPoint q;
    try {
      q.pos = {std::stod(row[static_cast<std::size_t>(lat)]), std::stod(row[static_cast<std::size_t>(lon)])};
    } catch (const std::exception&) {
      throw ParseError("query point CSV: non-numeric coordinate", t.row_lines[i]);
    }
    if (!is_valid(q.pos)) throw ParseError("query point CSV: coordinate out of range", t.row_lines[i]);
    if (label >= 0 && static_cast<std::size_t>(label) < row.size()) q.label = row[static_cast<std::size_t>(label)];
    out.push_back(std::move(q));
  }
  return out;
}

BatchResult coverage_batch(const RouteEngine& engine, std::span<const QueryPoint> points, const BatchOptions& options) {
  if (points.empty()) throw BatchError("coverage batch needs at least one query point");
  struct Slot {
    std::optional<RoutePair> pair;
    std::string failure;
  };
  std::vector<Slot> slots(points.size());

  auto run_one = [&](std::size_t i) {
    RouteRequest req;
    req.start = points[i].pos;
    req.target_length_m = options.target_length_m;
    req.k_headings = options.k_headings;
    req.length_tolerance = options.length_tolerance;
    req.seed = options.seed;
    try {
      req.profile = "scenic";
      Route scenic = engine.route(req);
      req.profile = "urban";
      Route urban = engine.route(req);
      slots[i].pair = RoutePair{points[i], std::move(scenic), std::move(urban)};
    } catch (const Error& e) {
      slots[i].failure = "query point " + std::to_string(i) + (points[i].label.empty() ? "" : " (" + points[i].label + ")") +
                         " (" + req.profile + "): " + e.what();
    }
  };

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(points.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < points.size(); i = next++) run_one(i);
      });
    for (auto& th : pool) th.join();
  }

  BatchResult out;
  for (auto& s : slots) {
    if (s.pair) {
      out.pairs.push_back(std::move(*s.pair));
    } else {
      ++out.skipped;
      out.failures.push_back(std::move(s.failure));
    }
  }
  if (out.pairs.empty()) throw BatchError("no query point produced both a scenic and an urban route");
  return out;
}

RouteBuffer::RouteBuffer(std::vector<LatLon> polyline, double width_m) : polyline_(std::move(polyline)), width_m_(width_m) {
  if (polyline_.empty()) throw ValidationError("cannot buffer an empty route");
  if (!(width_m_ >= 0.0)) throw ValidationError("buffer width must be non-negative");
}

bool RouteBuffer::contains(const LatLon& p) const { return point_to_polyline_m(p, polyline_) <= width_m_; }

RouteBuffer route_buffer(const Route& route, double width_m) {
  if (route.empty() || route.geometry.empty()) throw ValidationError("cannot buffer an empty route");
  return RouteBuffer(route.geometry, width_m);
}

TagCorpus::TagCorpus(std::vector<GeoTagRecord> records) : records_(std::move(records)) {
  std::vector<LatLon> pts;
  pts.reserve(records_.size());
  for (const auto& r : records_) pts.push_back(is_valid(r.pos) ? r.pos : LatLon{90.0, 180.0});
  index_ = PointIndex(std::move(pts));
}

std::vector<std::size_t> TagCorpus::inside(const RouteBuffer& buffer) const {
  std::vector<std::size_t> out;
  for (std::size_t i : index_.within(buffer.polyline(), buffer.width_m()))
    if (is_valid(records_[i].pos)) out.push_back(i);
  return out;
}

TagCounts tag_counts(const RouteBuffer& buffer, const TagCorpus& corpus) {
  TagCounts c;
  for (std::size_t i : corpus.inside(buffer)) {
    for (const std::string& t : corpus.records()[i].tags) {
      ++c.counts[to_lower(t)];
      ++c.total;
    }
  }
  return c;
}

TagFrequencies to_frequencies(const TagCounts& counts) {
  TagFrequencies f;
  if (counts.total == 0) {
    f.empty_buffer = true;
    return f;
  }
  for (const auto& [tag, n] : counts.counts) f.freq[tag] = static_cast<double>(n) / counts.total;
  return f;
}

TagFrequencies tag_frequencies(const Route& route, const TagCorpus& corpus, double width_m) {
  return to_frequencies(tag_counts(route_buffer(route, width_m), corpus));
}

int total_tag_count(std::span<const PairTagCounts> pairs, const std::string& tag) {
  int total = 0;
  for (const auto& p : pairs)
    for (const TagCounts* c : {&p.scenic, &p.urban})
      if (auto it = c->counts.find(tag); it != c->counts.end()) total += it->second;
  return total;
}

namespace {

double rel_freq(const TagCounts& c, const std::string& tag) {
  if (c.total == 0) return 0.0;
  auto it = c.counts.find(tag);
  return it == c.counts.end() ? 0.0 : static_cast<double>(it->second) / c.total;
}

// Summation in sorted order keeps the mean independent of pair order.
double order_free_mean(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

ImportanceTerms importance_terms(std::span<const PairTagCounts> pairs, const std::string& tag, int min_count,
                                 double smoothing) {
  if (pairs.empty()) throw ValidationError("importance needs at least one route pair");
  ImportanceTerms t;
  t.total_count = total_tag_count(pairs, tag);
  if (t.total_count <= min_count)
    throw ExcludedTagError("tag '" + tag + "' occurs " + std::to_string(t.total_count) + " times, not more than " +
                           std::to_string(min_count));
  std::vector<double> fs, fu;
  double pooled = 0.0;
  for (const auto& p : pairs) {
    fs.push_back(rel_freq(p.scenic, tag));
    fu.push_back(rel_freq(p.urban, tag));
    pooled += p.scenic.total + p.urban.total;
  }
  t.scenic_mean_freq = order_free_mean(std::move(fs));
  t.urban_mean_freq = order_free_mean(std::move(fu));
  t.pseudo_freq = smoothing / pooled;
  t.ratio = (t.scenic_mean_freq + t.pseudo_freq) / (t.urban_mean_freq + t.pseudo_freq);
  return t;
}

double importance(std::span<const PairTagCounts> pairs, const std::string& tag, int min_count, double smoothing) {
  return importance_terms(pairs, tag, min_count, smoothing).ratio;
}

std::vector<PairTagCounts> pair_tag_counts(std::span<const RoutePair> pairs, const TagCorpus& corpus, double width_m) {
  std::vector<PairTagCounts> out;
  out.reserve(pairs.size());
  for (const RoutePair& p : pairs)
    out.push_back({tag_counts(route_buffer(p.scenic, width_m), corpus), tag_counts(route_buffer(p.urban, width_m), corpus)});
  return out;
}

ImportanceReport importance_report(std::span<const PairTagCounts> pairs, int min_count, double smoothing) {
  ImportanceReport r;
  r.min_count = min_count;
  r.smoothing = smoothing;
  if (pairs.empty()) return r;
  std::set<std::string> tags;
  for (const auto& p : pairs)
    for (const TagCounts* c : {&p.scenic, &p.urban})
      for (const auto& kv : c->counts) tags.insert(kv.first);
  for (const std::string& tag : tags) {
    if (total_tag_count(pairs, tag) <= min_count) continue;
    const ImportanceTerms t = importance_terms(pairs, tag, min_count, smoothing);
    r.entries.push_back({tag, t.total_count, t.scenic_mean_freq, t.urban_mean_freq, t.ratio});
  }
  std::sort(r.entries.begin(), r.entries.end(), [](const ImportanceEntry& a, const ImportanceEntry& b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.tag < b.tag;
  });
  return r;
}

ImportanceReport importance_report(std::span<const RoutePair> pairs, const TagCorpus& corpus, int min_count,
                                   double smoothing, double width_m) {
  const auto counts = pair_tag_counts(pairs, corpus, width_m);
  return importance_report(counts, min_count, smoothing);
}

std::string report_to_csv(const ImportanceReport& report) {
  std::ostringstream out;
  out << "tag,count,scenic_mean_freq,urban_mean_freq,importance\n";
  for (const auto& e : report.entries)
    out << csv_escape(e.tag) << ',' << e.total_count << ',' << format_double(e.scenic_mean_freq) << ','
        << format_double(e.urban_mean_freq) << ',' << format_double(e.importance) << '\n';
  return out.str();
}

json report_to_json(const ImportanceReport& report) {
  json tags = json::array();
  for (const auto& e : report.entries)
    tags.push_back({{"tag", e.tag},
                    {"count", e.total_count},
                    {"importance", e.importance},
                    {"scenic_mean_freq", e.scenic_mean_freq},
                    {"urban_mean_freq", e.urban_mean_freq}});
  return {{"min_count", report.min_count}, {"smoothing", report.smoothing}, {"empty", report.empty()}, {"tags", tags}};
}

json pairs_to_geojson(std::span<const RoutePair> pairs) {
  json features = json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    for (const Route* r : {&pairs[i].scenic, &pairs[i].urban}) {
      json f = route_to_geojson(*r);
      f["properties"]["pair"] = i;
      f["properties"]["label"] = pairs[i].query.label;
      f["properties"]["query_point"] = {pairs[i].query.pos.lon, pairs[i].query.pos.lat};
      features.push_back(std::move(f));
    }
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

}  // namespace runscape
