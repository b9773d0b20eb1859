#pragma once

#include <array>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "runscape/context_scores.hpp"
#include "runscape/sensory_scores.hpp"
#include "runscape/street_graph.hpp"

namespace runscape {

enum class Dimension : std::uint8_t { smell, sound, scenery, ground, obstacles, traffic, safety };
inline constexpr std::size_t kDimensions = 7;
inline constexpr std::array<Dimension, kDimensions> kAllDimensions = {
    Dimension::smell,     Dimension::sound,   Dimension::scenery, Dimension::ground,
    Dimension::obstacles, Dimension::traffic, Dimension::safety};

std::string_view to_string(Dimension d) noexcept;
Dimension parse_dimension(std::string_view s);  // throws UnknownKeyError

// Per-segment proxy columns. The first 20 feed dimension scores; the two
// count columns are carried for inspection and are the log-scaled ones.
enum class Column : std::uint8_t {
  smell_nature, smell_food, smell_emissions, smell_chemical, smell_synthetic, smell_animals, smell_odorless,
  sound_natural, sound_people, sound_transport, sound_music, sound_quiet,
  beauty,
  ground_grass, ground_pavement, ground_sand, ground_park,
  obstacles, traffic, safety,
  photo_count, crime_count,
};
inline constexpr std::size_t kColumns = 22;

std::string_view to_string(Column c) noexcept;
Column parse_column(std::string_view s);  // throws UnknownKeyError

inline const std::set<Column>& default_skewed_columns() {
  static const std::set<Column> s = {Column::photo_count, Column::crime_count};
  return s;
}

inline constexpr std::array<std::string_view, 7> kSmellComponents = {
    "nature", "food", "emissions", "chemical", "synthetic", "animals", "odorless"};
inline constexpr std::array<std::string_view, 5> kSoundComponents = {"natural", "people", "transport", "music",
                                                                     "quiet"};
inline constexpr std::array<std::string_view, 5> kSceneryComponents = {"natural", "river", "urban", "beach",
                                                                       "industrial"};
inline constexpr std::array<std::string_view, 4> kGroundComponents = {"grass", "pavement", "sand", "park"};

/// Alpha per dimension and beta per component for one path type.
struct WeightProfile {
  std::string name;
  std::array<double, kDimensions> alpha{};
  std::array<double, 7> smell_beta{};
  std::array<double, 5> sound_beta{};
  // Documented constants; scenery is scored from the single beauty proxy.
  std::array<double, 5> scenery_beta{};
  std::array<double, 4> ground_beta{};

  double alpha_of(Dimension d) const noexcept { return alpha[static_cast<std::size_t>(d)]; }
  double beta(Dimension d, std::string_view component) const;  // throws UnknownKeyError
  WeightProfile scaled_alpha(double factor) const;

  friend bool operator==(const WeightProfile&, const WeightProfile&) = default;
};

struct BuiltinProfiles {
  WeightProfile scenic;
  WeightProfile urban;
};

BuiltinProfiles builtin_profiles();

nlohmann::json profiles_to_json(const BuiltinProfiles& profiles);
BuiltinProfiles profiles_from_json(const nlohmann::json& j);  // throws FormatError

/// x -> ln(1+x) when skewed, then min-max to [0,1]; a constant column maps to 0.5.
std::vector<double> normalize_column(std::span<const double> values, bool skewed);

using ColumnSet = std::array<std::vector<double>, kColumns>;

ColumnSet normalize_components(const ColumnSet& raw, const std::set<Column>& skewed = default_skewed_columns());

/// Raw and normalized proxy values for every segment of a (filtered) graph.
struct ComponentTable {
  std::vector<SegmentId> ids;
  ColumnSet raw;
  ColumnSet norm;

  std::size_t size() const noexcept { return ids.size(); }
  double raw_at(std::size_t seg, Column c) const { return raw[static_cast<std::size_t>(c)][seg]; }
  double norm_at(std::size_t seg, Column c) const { return norm[static_cast<std::size_t>(c)][seg]; }
};

/// Collects raw proxies for every segment and normalizes them network-wide.
/// The graph must already be filtered; traffic scoring rejects excluded classes.
ComponentTable build_component_table(const StreetGraph& graph, const SensoryIndex& sensory, const CrimeIndex& crimes,
                                     const TrafficTiers& tiers = {}, double crime_buffer_m = kCrimeBufferM);

/// Re-derives `norm` from `raw`.
void renormalize(ComponentTable& table, const std::set<Column>& skewed = default_skewed_columns());

/// Normalized component values of one segment, addressed by Column.
using ComponentRow = std::array<double, kColumns>;
ComponentRow row_of(const ComponentTable& table, std::size_t seg);

double dimension_score(const ComponentRow& norm, Dimension dim, const WeightProfile& profile);
double dimension_score(const ComponentRow& norm, std::string_view dim, const WeightProfile& profile);

double desirability_raw(const ComponentRow& norm, const WeightProfile& profile);

struct CostMode {
  enum class Kind { detour_bounded, paper_reciprocal };
  Kind kind = Kind::detour_bounded;
  double gamma = 2.0;
  double epsilon = 0.01;

  static CostMode detour_bounded(double gamma = 2.0) { return {Kind::detour_bounded, gamma, 0.01}; }
  static CostMode paper_reciprocal(double epsilon = 0.01) { return {Kind::paper_reciprocal, 2.0, epsilon}; }
};

std::string_view to_string(CostMode::Kind k) noexcept;
CostMode::Kind parse_cost_mode(std::string_view s);  // throws UnknownKeyError

/// Dimension scores, raw desirability d and its network min-max s per segment
/// under one profile.
struct ProfileScores {
  WeightProfile profile;
  std::vector<std::array<double, kDimensions>> dimensions;
  std::vector<double> d_raw;
  std::vector<double> s_norm;
  double d_min = 0.0;
  double d_max = 0.0;
};

ProfileScores score_profile(const ComponentTable& table, const WeightProfile& profile);

double cost_per_meter(double s_norm, double d_raw, const CostMode& mode) noexcept;
double edge_cost(double length_m, double s_norm, double d_raw, const CostMode& mode) noexcept;

/// Lower bound on cost per meter over every segment, used to scale the A* heuristic.
double min_cost_per_meter(const ProfileScores& scores, const CostMode& mode) noexcept;

/// A filtered graph with its component table. Immutable once built.
class ScoredNetwork {
 public:
  ScoredNetwork(StreetGraph graph, ComponentTable table);

  const StreetGraph& graph() const noexcept { return graph_; }
  const ComponentTable& components() const noexcept { return table_; }

  ProfileScores score(const WeightProfile& profile) const { return score_profile(table_, profile); }

 private:
  StreetGraph graph_;
  ComponentTable table_;
};

struct BoundingBox {
  double min_lon, min_lat, max_lon, max_lat;
  bool contains(const LatLon& p) const noexcept {
    return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat && p.lat <= max_lat;
  }
};

/// GeoJSON score layer: every segment with raw/normalized components,
/// dimension scores, d and s. Optionally restricted to segments touching `bbox`.
nlohmann::json scores_to_geojson(const ScoredNetwork& net, const ProfileScores& scores,
                                 const std::optional<BoundingBox>& bbox = std::nullopt);

}  // namespace runscape
