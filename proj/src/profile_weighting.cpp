#include "runscape/profile_weighting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "runscape/errors.hpp"
#include "runscape/geojson.hpp"

namespace runscape {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kDimensions> kDimensionNames = {"smell",     "sound",   "scenery", "ground",
                                                                       "obstacles", "traffic", "safety"};

constexpr std::array<std::string_view, kColumns> kColumnNames = {
    "smell_nature",  "smell_food",      "smell_emissions", "smell_chemical", "smell_synthetic", "smell_animals",
    "smell_odorless", "sound_natural",  "sound_people",    "sound_transport", "sound_music",    "sound_quiet",
    "beauty",        "ground_grass",    "ground_pavement", "ground_sand",    "ground_park",     "obstacles",
    "traffic",       "safety",          "photo_count",     "crime_count"};

template <std::size_t N>
std::size_t component_index(const std::array<std::string_view, N>& names, std::string_view c, Dimension d) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == c) return i;
  throw UnknownKeyError("dimension '" + std::string(to_string(d)) + "' has no component '" + std::string(c) + "'");
}

double col(const ComponentRow& row, Column c) { return row[static_cast<std::size_t>(c)]; }

template <std::size_t N>
double beta_mean(const ComponentRow& row, Column first, const std::array<double, N>& beta) {
  double sum = 0.0;
  for (std::size_t i = 0; i < N; ++i) sum += beta[i] * row[static_cast<std::size_t>(first) + i];
  return sum / static_cast<double>(N);
}

template <std::size_t N>
json beta_json(const std::array<std::string_view, N>& names, const std::array<double, N>& beta) {
  json j = json::object();
  for (std::size_t i = 0; i < N; ++i) j[std::string(names[i])] = beta[i];
  return j;
}

template <std::size_t N>
void beta_from(const json& j, const std::array<std::string_view, N>& names, std::array<double, N>& beta) {
  if (j.size() != N) throw FormatError("profile: expected " + std::to_string(N) + " beta entries");
  for (std::size_t i = 0; i < N; ++i) beta[i] = j.at(std::string(names[i])).get<double>();
}

}  // namespace

std::string_view to_string(Dimension d) noexcept { return kDimensionNames[static_cast<std::size_t>(d)]; }

Dimension parse_dimension(std::string_view s) {
  for (std::size_t i = 0; i < kDimensions; ++i)
    if (kDimensionNames[i] == s) return static_cast<Dimension>(i);
  throw UnknownKeyError("unknown dimension '" + std::string(s) + "'");
}

std::string_view to_string(Column c) noexcept { return kColumnNames[static_cast<std::size_t>(c)]; }

Column parse_column(std::string_view s) {
  for (std::size_t i = 0; i < kColumns; ++i)
    if (kColumnNames[i] == s) return static_cast<Column>(i);
  throw UnknownKeyError("unknown component column '" + std::string(s) + "'");
}

double WeightProfile::beta(Dimension d, std::string_view component) const {
  switch (d) {
    case Dimension::smell: return smell_beta[component_index(kSmellComponents, component, d)];
    case Dimension::sound: return sound_beta[component_index(kSoundComponents, component, d)];
    case Dimension::scenery: return scenery_beta[component_index(kSceneryComponents, component, d)];
    case Dimension::ground: return ground_beta[component_index(kGroundComponents, component, d)];
    default: break;
  }
  throw UnknownKeyError("dimension '" + std::string(to_string(d)) + "' has no beta coefficients");
}

WeightProfile WeightProfile::scaled_alpha(double factor) const {
  WeightProfile p = *this;
  for (double& a : p.alpha) a *= factor;
  return p;
}

BuiltinProfiles builtin_profiles() {
  BuiltinProfiles p;
  p.scenic.name = "scenic";
  //                smell sound scenery ground obstacles traffic safety
  p.scenic.alpha = {1.50, 1.20, 1.50, 1.60, 1.60, 1.70, 1.70};
  p.scenic.smell_beta = {1.80, -0.64, -1.80, -1.80, -1.30, -0.23, 1.40};
  p.scenic.sound_beta = {1.70, 0.08, -1.30, 0.81, 1.40};
  p.scenic.scenery_beta = {1.90, 1.80, 0.04, 0.76, -1.10};
  p.scenic.ground_beta = {0.58, 0.92, -0.37, 1.60};

  p.urban.name = "urban";
  p.urban.alpha = {0.40, -0.06, 0.42, 0.74, 0.39, 0.48, 0.58};
  p.urban.smell_beta = {1.40, -0.17, -1.40, -1.40, -0.81, -0.19, 0.89};
  p.urban.sound_beta = {1.10, 0.10, -0.68, 0.67, 0.89};
  p.urban.scenery_beta = {1.50, 1.40, 0.55, 0.61, -0.43};
  p.urban.ground_beta = {0.22, 1.10, -0.39, 1.30};
  return p;
}

json profiles_to_json(const BuiltinProfiles& profiles) {
  json out = json::object();
  for (const WeightProfile* p : {&profiles.scenic, &profiles.urban}) {
    json alpha = json::object();
    for (Dimension d : kAllDimensions) alpha[std::string(to_string(d))] = p->alpha_of(d);
    out[p->name] = {{"alpha", alpha},
                    {"beta",
                     {{"smell", beta_json(kSmellComponents, p->smell_beta)},
                      {"sound", beta_json(kSoundComponents, p->sound_beta)},
                      {"scenery", beta_json(kSceneryComponents, p->scenery_beta)},
                      {"ground", beta_json(kGroundComponents, p->ground_beta)}}}};
  }
  return out;
}

BuiltinProfiles profiles_from_json(const json& j) {
  BuiltinProfiles out;
  try {
    for (auto* p : {&out.scenic, &out.urban}) {
      const std::string name = p == &out.scenic ? "scenic" : "urban";
      const json& pj = j.at(name);
      p->name = name;
      const json& alpha = pj.at("alpha");
      if (alpha.size() != kDimensions) throw FormatError("profile " + name + ": expected 7 alpha values");
      for (Dimension d : kAllDimensions)
        p->alpha[static_cast<std::size_t>(d)] = alpha.at(std::string(to_string(d))).get<double>();
      const json& beta = pj.at("beta");
      beta_from(beta.at("smell"), kSmellComponents, p->smell_beta);
      beta_from(beta.at("sound"), kSoundComponents, p->sound_beta);
      beta_from(beta.at("scenery"), kSceneryComponents, p->scenery_beta);
      beta_from(beta.at("ground"), kGroundComponents, p->ground_beta);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("profile config: ") + e.what());
  }
  return out;
}

std::vector<double> normalize_column(std::span<const double> values, bool skewed) {
  std::vector<double> out(values.begin(), values.end());
  if (out.empty()) return out;
  if (skewed)
    for (double& v : out) v = std::log1p(std::max(0.0, v));
  const auto [lo, hi] = std::minmax_element(out.begin(), out.end());
  const double min = *lo, max = *hi;
  if (!(max > min)) {
    std::fill(out.begin(), out.end(), 0.5);
    return out;
  }
  for (double& v : out) v = std::clamp((v - min) / (max - min), 0.0, 1.0);
  return out;
}

ColumnSet normalize_components(const ColumnSet& raw, const std::set<Column>& skewed) {
  ColumnSet out;
  for (std::size_t c = 0; c < kColumns; ++c) out[c] = normalize_column(raw[c], skewed.count(static_cast<Column>(c)) > 0);
  return out;
}

ComponentTable build_component_table(const StreetGraph& graph, const SensoryIndex& sensory, const CrimeIndex& crimes,
                                     const TrafficTiers& tiers, double crime_buffer_m) {
  ComponentTable t;
  const std::size_t n = graph.segments().size();
  if (n == 0) throw EmptyGraphError("cannot score an empty graph");
  t.ids.reserve(n);
  for (auto& c : t.raw) c.resize(n);
  auto set = [&](Column c, std::size_t i, double v) { t.raw[static_cast<std::size_t>(c)][i] = v; };

  for (std::size_t i = 0; i < n; ++i) {
    const Segment& s = graph.segments()[i];
    t.ids.push_back(s.id);
    for (std::size_t k = 0; k < kSmellCategories; ++k)
      set(static_cast<Column>(static_cast<std::size_t>(Column::smell_nature) + k), i,
          smell_fraction(sensory, s.id, static_cast<SmellCategory>(k)).value);
    set(Column::smell_odorless, i, odorless_score(sensory, s.id));
    for (std::size_t k = 0; k < kSoundCategories; ++k)
      set(static_cast<Column>(static_cast<std::size_t>(Column::sound_natural) + k), i,
          sound_fraction(sensory, s.id, static_cast<SoundCategory>(k)).value);
    set(Column::beauty, i, beauty_score(sensory, s.id));
    for (std::size_t k = 0; k < 4; ++k)
      set(static_cast<Column>(static_cast<std::size_t>(Column::ground_grass) + k), i,
          ground_indicator(s, kKnownSurfaces[k]));
    set(Column::obstacles, i, obstacle_score(s));
    set(Column::traffic, i, traffic_score(s, tiers));
    const int crimes_near = crimes.count_within(s.polyline, crime_buffer_m);
    set(Column::safety, i, safety_from(crimes_near));
    set(Column::photo_count, i, sensory.at(s.id).photo_count);
    set(Column::crime_count, i, crimes_near);
  }
  renormalize(t);
  return t;
}

void renormalize(ComponentTable& table, const std::set<Column>& skewed) {
  table.norm = normalize_components(table.raw, skewed);
}

ComponentRow row_of(const ComponentTable& table, std::size_t seg) {
  ComponentRow row{};
  for (std::size_t c = 0; c < kColumns; ++c) row[c] = table.norm[c][seg];
  return row;
}

double dimension_score(const ComponentRow& norm, Dimension dim, const WeightProfile& profile) {
  switch (dim) {
    case Dimension::smell: return beta_mean(norm, Column::smell_nature, profile.smell_beta);
    case Dimension::sound: return beta_mean(norm, Column::sound_natural, profile.sound_beta);
    case Dimension::scenery: return col(norm, Column::beauty);
    case Dimension::ground: return beta_mean(norm, Column::ground_grass, profile.ground_beta);
    case Dimension::obstacles: return col(norm, Column::obstacles);
    case Dimension::traffic: return col(norm, Column::traffic);
    case Dimension::safety: return col(norm, Column::safety);
  }
  throw UnknownKeyError("unknown dimension");
}

double dimension_score(const ComponentRow& norm, std::string_view dim, const WeightProfile& profile) {
  return dimension_score(norm, parse_dimension(dim), profile);
}

double desirability_raw(const ComponentRow& norm, const WeightProfile& profile) {
  double d = 0.0;
  for (Dimension dim : kAllDimensions) d += profile.alpha_of(dim) * dimension_score(norm, dim, profile);
  return d;
}

std::string_view to_string(CostMode::Kind k) noexcept {
  return k == CostMode::Kind::detour_bounded ? "detour_bounded" : "paper_reciprocal";
}

CostMode::Kind parse_cost_mode(std::string_view s) {
  if (s == "detour_bounded") return CostMode::Kind::detour_bounded;
  if (s == "paper_reciprocal") return CostMode::Kind::paper_reciprocal;
  throw UnknownKeyError("unknown cost mode '" + std::string(s) + "'");
}

ProfileScores score_profile(const ComponentTable& table, const WeightProfile& profile) {
  ProfileScores out;
  out.profile = profile;
  const std::size_t n = table.size();
  out.dimensions.resize(n);
  out.d_raw.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ComponentRow row = row_of(table, i);
    double d = 0.0;
    for (Dimension dim : kAllDimensions) {
      const double v = dimension_score(row, dim, profile);
      out.dimensions[i][static_cast<std::size_t>(dim)] = v;
      d += profile.alpha_of(dim) * v;
    }
    out.d_raw[i] = d;
  }
  out.s_norm = normalize_column(out.d_raw, false);
  if (n > 0) {
    const auto [lo, hi] = std::minmax_element(out.d_raw.begin(), out.d_raw.end());
    out.d_min = *lo;
    out.d_max = *hi;
  }
  return out;
}

double cost_per_meter(double s_norm, double d_raw, const CostMode& mode) noexcept {
  if (mode.kind == CostMode::Kind::detour_bounded) return 1.0 + mode.gamma * (1.0 - s_norm);
  return 1.0 / std::max(mode.epsilon, d_raw);
}

double edge_cost(double length_m, double s_norm, double d_raw, const CostMode& mode) noexcept {
  return length_m * cost_per_meter(s_norm, d_raw, mode);
}

double min_cost_per_meter(const ProfileScores& scores, const CostMode& mode) noexcept {
  if (mode.kind == CostMode::Kind::detour_bounded) return 1.0;
  return 1.0 / std::max(mode.epsilon, scores.d_max);
}

ScoredNetwork::ScoredNetwork(StreetGraph graph, ComponentTable table) : graph_(std::move(graph)), table_(std::move(table)) {
  if (table_.size() != graph_.segments().size()) throw ContractError("component table does not match graph");
  for (std::size_t i = 0; i < table_.size(); ++i)
    if (table_.ids[i] != graph_.segments()[i].id) throw ContractError("component table order does not match graph");
}

json scores_to_geojson(const ScoredNetwork& net, const ProfileScores& scores, const std::optional<BoundingBox>& bbox) {
  json features = json::array();
  const auto segs = net.graph().segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    if (bbox && std::none_of(s.polyline.begin(), s.polyline.end(), [&](const LatLon& p) { return bbox->contains(p); }))
      continue;
    json raw = json::object(), norm = json::object(), dims = json::object();
    for (std::size_t c = 0; c < kColumns; ++c) {
      raw[std::string(kColumnNames[c])] = net.components().raw[c][i];
      norm[std::string(kColumnNames[c])] = net.components().norm[c][i];
    }
    for (Dimension d : kAllDimensions)
      dims[std::string(to_string(d))] = scores.dimensions[i][static_cast<std::size_t>(d)];
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", line_coordinates(s.polyline)}}},
                        {"properties",
                         {{"id", s.id},
                          {"profile", scores.profile.name},
                          {"length_m", s.length_m},
                          {"surface", to_string(s.surface)},
                          {"way_class", to_string(s.way_class)},
                          {"raw", raw},
                          {"norm", norm},
                          {"dimensions", dims},
                          {"desirability_raw", scores.d_raw[i]},
                          {"desirability", scores.s_norm[i]}}}});
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

}  // namespace runscape
