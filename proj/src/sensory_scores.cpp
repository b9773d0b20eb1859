#include "runscape/sensory_scores.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "runscape/errors.hpp"
#include "runscape/text.hpp"

namespace runscape {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kSmellCategories> kSmellNames = {"nature",    "food",      "emissions",
                                                                        "chemical", "synthetic", "animals"};
constexpr std::array<std::string_view, kSoundCategories> kSoundNames = {"natural", "people", "transport", "music",
                                                                        "quiet"};

template <std::size_t N>
bool pairwise_disjoint(const std::array<std::set<std::string>, N>& sets, std::string& clash) {
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = a + 1; b < N; ++b)
      for (const auto& w : sets[a])
        if (sets[b].count(w)) {
          clash = w;
          return false;
        }
  return true;
}

}  // namespace

std::string_view to_string(SmellCategory c) noexcept { return kSmellNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(SoundCategory c) noexcept { return kSoundNames[static_cast<std::size_t>(c)]; }

SmellCategory parse_smell_category(std::string_view s) {
  for (std::size_t i = 0; i < kSmellCategories; ++i)
    if (kSmellNames[i] == s) return static_cast<SmellCategory>(i);
  throw UnknownKeyError("unknown smell category '" + std::string(s) + "'");
}

SoundCategory parse_sound_category(std::string_view s) {
  for (std::size_t i = 0; i < kSoundCategories; ++i)
    if (kSoundNames[i] == s) return static_cast<SoundCategory>(i);
  throw UnknownKeyError("unknown sound category '" + std::string(s) + "'");
}

Lexicon Lexicon::defaults() {
  Lexicon l;
  l.smell[0] = {"tree", "trees", "flower", "flowers", "grass", "garden", "forest",
                "leaves", "rose", "blossom", "lavender", "pine", "meadow"};
  l.smell[1] = {"food", "restaurant", "cafe", "coffee", "bakery", "bread",
                "pizza", "burger", "curry", "chips", "streetfood"};
  l.smell[2] = {"car", "traffic", "bus", "exhaust", "smoke", "diesel", "petrol", "fumes", "motorbike"};
  l.smell[3] = {"paint", "chemical", "gasoline", "bleach", "chlorine", "tar", "solvent"};
  l.smell[4] = {"plastic", "rubber", "perfume", "glue", "shopping", "mall"};
  l.smell[5] = {"dog", "horse", "pigeon", "duck", "zoo", "cat", "stable"};
  l.sound[0] = {"tree", "trees", "bird", "birds", "wind", "water", "river", "rain", "leaves", "stream"};
  l.sound[1] = {"people", "crowd", "festival", "party", "children", "kids", "market", "chatter"};
  l.sound[2] = {"car", "bus", "train", "traffic", "taxi", "tube", "motorbike", "plane", "siren"};
  l.sound[3] = {"music", "concert", "band", "guitar", "busker", "gig", "choir"};
  l.sound[4] = {"quiet", "calm", "silence", "peaceful", "library", "church"};
  l.positive = {"happy", "beautiful", "love", "lovely", "sunny", "fun", "smile", "pretty", "amazing", "nice", "wonderful"};
  l.negative = {"dirt", "dirty", "sad", "ugly", "rubbish", "trash", "graffiti", "broken", "angry", "gloomy"};
  return l;
}

Lexicon Lexicon::from_json(std::string_view text) {
  Lexicon l;
  try {
    const json j = json::parse(text);
    auto words = [](const json& arr) {
      std::set<std::string> out;
      for (const auto& w : arr) out.insert(to_lower(w.get<std::string>()));
      return out;
    };
    for (const auto& [k, v] : j.at("smell").items()) {
      try {
        l.smell[static_cast<std::size_t>(parse_smell_category(k))] = words(v);
      } catch (const UnknownKeyError& e) {
        throw FormatError(std::string("lexicon: ") + e.what());
      }
    }
    for (const auto& [k, v] : j.at("sound").items()) {
      try {
        l.sound[static_cast<std::size_t>(parse_sound_category(k))] = words(v);
      } catch (const UnknownKeyError& e) {
        throw FormatError(std::string("lexicon: ") + e.what());
      }
    }
    l.positive = words(j.at("positive"));
    l.negative = words(j.at("negative"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("lexicon: ") + e.what());
  }
  l.validate();
  return l;
}

void Lexicon::validate() const {
  std::string clash;
  if (!pairwise_disjoint(smell, clash)) throw FormatError("lexicon: '" + clash + "' is in two smell categories");
  if (!pairwise_disjoint(sound, clash)) throw FormatError("lexicon: '" + clash + "' is in two sound categories");
  for (const auto& w : positive)
    if (negative.count(w)) throw FormatError("lexicon: '" + w + "' is both positive and negative");
}

std::optional<SmellCategory> Lexicon::smell_of(const std::string& word) const {
  for (std::size_t i = 0; i < kSmellCategories; ++i)
    if (smell[i].count(word)) return static_cast<SmellCategory>(i);
  return std::nullopt;
}

std::optional<SoundCategory> Lexicon::sound_of(const std::string& word) const {
  for (std::size_t i = 0; i < kSoundCategories; ++i)
    if (sound[i].count(word)) return static_cast<SoundCategory>(i);
  return std::nullopt;
}

int SegmentSensory::smell_total() const noexcept {
  int t = 0;
  for (int c : smell) t += c;
  return t;
}

int SegmentSensory::sound_total() const noexcept {
  int t = 0;
  for (int c : sound) t += c;
  return t;
}

SensoryIndex::SensoryIndex(const StreetGraph& graph) {
  ids_.reserve(graph.segments().size());
  for (const Segment& s : graph.segments()) {
    lookup_.emplace(s.id, ids_.size());
    ids_.push_back(s.id);
  }
  entries_.resize(ids_.size());
}

const SegmentSensory& SensoryIndex::at(SegmentId id) const {
  auto it = lookup_.find(id);
  if (it == lookup_.end()) throw UnknownKeyError("unknown segment id " + std::to_string(id));
  return entries_[it->second];
}

SegmentSensory& SensoryIndex::at(SegmentId id) {
  return const_cast<SegmentSensory&>(static_cast<const SensoryIndex&>(*this).at(id));
}

SensoryIndex ingest_geotags(std::span<const GeoTagRecord> records, const StreetGraph& graph,
                            const Lexicon& lexicon, double assign_radius_m) {
  if (!(assign_radius_m > 0.0)) throw ValidationError("assignment radius must be positive");
  SensoryIndex index(graph);
  for (const GeoTagRecord& r : records) {
    if (!is_valid(r.pos) || r.tags.empty()) {
      ++index.invalid;
      continue;
    }
    SegmentLocation loc;
    try {
      loc = snap_point(graph, r.pos.lat, r.pos.lon, assign_radius_m);
    } catch (const NoSnapError&) {
      ++index.unassigned;
      continue;
    }
    ++index.assigned;
    SegmentSensory& e = index.at(loc.segment_id);
    ++e.photo_count;
    for (const std::string& raw : r.tags) {
      const std::string tag = to_lower(raw);
      ++e.tag_count;
      if (auto c = lexicon.smell_of(tag)) ++e.smell[static_cast<std::size_t>(*c)];
      if (auto c = lexicon.sound_of(tag)) ++e.sound[static_cast<std::size_t>(*c)];
      if (lexicon.positive.count(tag)) ++e.positive_count;
      if (lexicon.negative.count(tag)) ++e.negative_count;
    }
  }
  return index;
}

Fraction smell_fraction(const SensoryIndex& index, SegmentId segment, SmellCategory category) {
  const SegmentSensory& e = index.at(segment);
  const int total = e.smell_total();
  if (total == 0) return {0.0, true};
  return {static_cast<double>(e.smell[static_cast<std::size_t>(category)]) / total, false};
}

Fraction smell_fraction(const SensoryIndex& index, SegmentId segment, std::string_view category) {
  return smell_fraction(index, segment, parse_smell_category(category));
}

Fraction sound_fraction(const SensoryIndex& index, SegmentId segment, SoundCategory category) {
  const SegmentSensory& e = index.at(segment);
  const int total = e.sound_total();
  if (total == 0) return {0.0, true};
  return {static_cast<double>(e.sound[static_cast<std::size_t>(category)]) / total, false};
}

Fraction sound_fraction(const SensoryIndex& index, SegmentId segment, std::string_view category) {
  return sound_fraction(index, segment, parse_sound_category(category));
}

double odorless_score(const SensoryIndex& index, SegmentId segment) {
  const SegmentSensory& e = index.at(segment);
  if (e.tag_count == 0) return 0.0;
  return std::clamp(1.0 - static_cast<double>(e.smell_total()) / e.tag_count, 0.0, 1.0);
}

Sentiment sentiment_fractions(const SensoryIndex& index, SegmentId segment) {
  const SegmentSensory& e = index.at(segment);
  if (e.tag_count == 0) return {};
  return {static_cast<double>(e.positive_count) / e.tag_count, static_cast<double>(e.negative_count) / e.tag_count};
}

double beauty_from(int photo_count, double f_pos, double f_neg) noexcept {
  return kBeautyPhotoWeight * std::log1p(static_cast<double>(photo_count)) + kBeautyPositiveWeight * f_pos +
         kBeautyNegativeWeight * f_neg;
}

double beauty_score(const SensoryIndex& index, SegmentId segment) {
  const Sentiment s = sentiment_fractions(index, segment);
  return beauty_from(index.at(segment).photo_count, s.positive, s.negative);
}

namespace {

std::vector<std::string> split_tags(const std::string& field) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : field) {
    if (c == ';' || c == '|' || std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(to_lower(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(to_lower(cur));
  return out;
}

}  // namespace

std::vector<GeoTagRecord> read_geotags_jsonl(std::istream& in) {
  std::vector<GeoTagRecord> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      GeoTagRecord r;
      r.pos = {j.at("lat").get<double>(), j.at("lon").get<double>()};
      for (const auto& t : j.at("tags")) r.tags.push_back(to_lower(t.get<std::string>()));
      if (j.contains("timestamp") && j["timestamp"].is_string()) r.timestamp = j["timestamp"].get<std::string>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ParseError(std::string("geotag record: ") + e.what(), lineno);
    }
  }
  return out;
}

std::vector<GeoTagRecord> read_geotags_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  const int lat = t.column("lat"), lon = t.column("lon"), tags = t.column("tags"), ts = t.column("timestamp");
  if (lat < 0 || lon < 0 || tags < 0) throw FormatError("geotag CSV needs lat, lon and tags columns");
  std::vector<GeoTagRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const auto need = static_cast<std::size_t>(std::max({lat, lon, tags}));
    if (row.size() <= need) throw ParseError("geotag CSV: short row", t.row_lines[i]);
    GeoTagRecord r;
    try {
      r.pos = {std::stod(row[static_cast<std::size_t>(lat)]), std::stod(row[static_cast<std::size_t>(lon)])};
    } catch (const std::exception&) {
      throw ParseError("geotag CSV: non-numeric coordinate", t.row_lines[i]);
    }
    r.tags = split_tags(row[static_cast<std::size_t>(tags)]);
    if (ts >= 0 && static_cast<std::size_t>(ts) < row.size() && !row[static_cast<std::size_t>(ts)].empty())
      r.timestamp = row[static_cast<std::size_t>(ts)];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace runscape
