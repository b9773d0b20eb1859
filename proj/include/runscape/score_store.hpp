#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "runscape/context_scores.hpp"
#include "runscape/profile_weighting.hpp"
#include "runscape/sensory_scores.hpp"
#include "runscape/street_graph.hpp"

namespace runscape {

inline constexpr double kDefaultAssignRadiusM = 50.0;

/// Everything needed to route and analyse without the raw inputs: the
/// filtered graph, raw proxy columns, and the geotag corpus.
struct ScoreStore {
  StreetGraph graph;
  ComponentTable components;
  std::vector<GeoTagRecord> geotags;
  int geotag_warnings = 0;
  int crime_warnings = 0;
};

struct IngestInputs {
  std::optional<std::string> osm_path;
  std::optional<std::string> segments_geojson_path;
  std::optional<std::string> geotags_path;  // .jsonl or .csv
  std::optional<std::string> crimes_path;
  std::optional<std::string> lexicon_path;
  std::optional<std::string> osm_tags_path;
  std::vector<std::string> crime_categories;  // empty = person-crime defaults
  double assign_radius_m = kDefaultAssignRadiusM;
  TrafficTiers tiers;
};

/// Loads, filters and scores. Throws on any contract failure.
ScoreStore ingest(const IngestInputs& inputs);

/// In-memory variant used by tests and bindings.
ScoreStore ingest_graph(const StreetGraph& graph, std::vector<GeoTagRecord> geotags, std::span<const CrimeRecord> crimes,
                        const Lexicon& lexicon = Lexicon::defaults(),
                        const std::set<std::string>& crime_categories = default_person_crime_categories(),
                        double assign_radius_m = kDefaultAssignRadiusM, const TrafficTiers& tiers = {});

/// Little-endian binary encoding; identical stores encode to identical bytes.
std::string encode_score_store(const ScoreStore& store);
ScoreStore decode_score_store(std::string_view bytes);  // throws FormatError

void save_score_store(const ScoreStore& store, const std::string& path);
ScoreStore load_score_store(const std::string& path);

std::vector<GeoTagRecord> read_geotags_file(const std::string& path);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace runscape
