#pragma once

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "runscape/street_graph.hpp"

namespace runscape {

enum class SmellCategory : std::uint8_t { nature, food, emissions, chemical, synthetic, animals };
enum class SoundCategory : std::uint8_t { natural, people, transport, music, quiet };

inline constexpr std::size_t kSmellCategories = 6;
inline constexpr std::size_t kSoundCategories = 5;

std::string_view to_string(SmellCategory c) noexcept;
std::string_view to_string(SoundCategory c) noexcept;
SmellCategory parse_smell_category(std::string_view s);  // throws UnknownKeyError
SoundCategory parse_sound_category(std::string_view s);  // throws UnknownKeyError

struct GeoTagRecord {
  LatLon pos;
  std::vector<std::string> tags;  // lowercase
  std::optional<std::string> timestamp;
};

/// Word lists mapping photo tags to smell and sound categories plus the
/// positive/negative emotion vocabularies used by the beauty proxy.
struct Lexicon {
  std::array<std::set<std::string>, kSmellCategories> smell;
  std::array<std::set<std::string>, kSoundCategories> sound;
  std::set<std::string> positive;
  std::set<std::string> negative;

  static Lexicon defaults();
  /// {smell:{category:[words]}, sound:{...}, positive:[...], negative:[...]}
  static Lexicon from_json(std::string_view json);  // throws FormatError
  void validate() const;                             // throws FormatError

  std::optional<SmellCategory> smell_of(const std::string& word) const;
  std::optional<SoundCategory> sound_of(const std::string& word) const;
};

struct SegmentSensory {
  int photo_count = 0;
  int tag_count = 0;
  int positive_count = 0;
  int negative_count = 0;
  std::array<int, kSmellCategories> smell{};
  std::array<int, kSoundCategories> sound{};

  int smell_total() const noexcept;
  int sound_total() const noexcept;
  friend bool operator==(const SegmentSensory&, const SegmentSensory&) = default;
};

struct Fraction {
  double value = 0.0;
  bool no_data = false;
};

/// Per-segment photo and tag evidence, aligned with the graph's segment order.
class SensoryIndex {
 public:
  SensoryIndex() = default;
  explicit SensoryIndex(const StreetGraph& graph);

  const SegmentSensory& at(SegmentId id) const;  // throws UnknownKeyError
  SegmentSensory& at(SegmentId id);
  std::span<const SegmentSensory> entries() const noexcept { return entries_; }
  std::span<const SegmentId> segment_ids() const noexcept { return ids_; }

  int assigned = 0;
  int unassigned = 0;  // valid record with no segment inside the radius
  int invalid = 0;     // bad coordinates or no tags
  int warning_count() const noexcept { return unassigned + invalid; }

  friend bool operator==(const SensoryIndex& a, const SensoryIndex& b) {
    return a.ids_ == b.ids_ && a.entries_ == b.entries_ && a.assigned == b.assigned &&
           a.unassigned == b.unassigned && a.invalid == b.invalid;
  }

 private:
  std::vector<SegmentId> ids_;
  std::vector<SegmentSensory> entries_;
  std::unordered_map<SegmentId, std::size_t> lookup_;
};

SensoryIndex ingest_geotags(std::span<const GeoTagRecord> records, const StreetGraph& graph,
                            const Lexicon& lexicon, double assign_radius_m);

Fraction smell_fraction(const SensoryIndex& index, SegmentId segment, SmellCategory category);
Fraction smell_fraction(const SensoryIndex& index, SegmentId segment, std::string_view category);
Fraction sound_fraction(const SensoryIndex& index, SegmentId segment, SoundCategory category);
Fraction sound_fraction(const SensoryIndex& index, SegmentId segment, std::string_view category);

/// Share of the segment's tags that carry no smell evidence, clipped to [0,1].
/// Zero when the segment has no tags at all.
double odorless_score(const SensoryIndex& index, SegmentId segment);

struct Sentiment {
  double positive = 0.0;
  double negative = 0.0;
};
Sentiment sentiment_fractions(const SensoryIndex& index, SegmentId segment);

inline constexpr double kBeautyPhotoWeight = 0.03;
inline constexpr double kBeautyPositiveWeight = 0.20;
inline constexpr double kBeautyNegativeWeight = -0.21;

/// 0.03 ln(1 + photos) + 0.20 f_p - 0.21 f_n
double beauty_from(int photo_count, double f_pos, double f_neg) noexcept;
double beauty_score(const SensoryIndex& index, SegmentId segment);

/// JSON-Lines: {"lat":..,"lon":..,"tags":[..],"timestamp":".."} per line.
std::vector<GeoTagRecord> read_geotags_jsonl(std::istream& in);
/// CSV with columns lat, lon, tags (tags separated by ';' or spaces).
std::vector<GeoTagRecord> read_geotags_csv(std::istream& in);

}  // namespace runscape
