#include "runscape/score_store.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "runscape/errors.hpp"
#include "runscape/text.hpp"

namespace runscape {

namespace {

constexpr char kMagic[4] = {'R', 'S', 'C', 'S'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void raw(const char* p, std::size_t n) { buf_.append(p, n); }
  std::string take() { return std::move(buf_); }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(b_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(b_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::size_t count(std::size_t min_bytes_each) {
    const std::uint64_t n = u64();
    if (min_bytes_each && n > (b_.size() - pos_) / min_bytes_each) throw FormatError("score store: bad element count");
    return static_cast<std::size_t>(n);
  }
  bool done() const { return pos_ == b_.size(); }
  void need(std::size_t n) const {
    if (b_.size() - pos_ < n) throw FormatError("score store: truncated");
  }

 private:
  std::string_view b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

std::vector<GeoTagRecord> read_geotags_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  const bool csv = path.size() >= 4 && to_lower(path.substr(path.size() - 4)) == ".csv";
  return csv ? read_geotags_csv(in) : read_geotags_jsonl(in);
}

ScoreStore ingest_graph(const StreetGraph& graph, std::vector<GeoTagRecord> geotags, std::span<const CrimeRecord> crimes,
                        const Lexicon& lexicon, const std::set<std::string>& crime_categories, double assign_radius_m,
                        const TrafficTiers& tiers) {
  ScoreStore store;
  store.graph = filter_excluded(graph);
  const SensoryIndex sensory = ingest_geotags(geotags, store.graph, lexicon, assign_radius_m);
  const CrimeIndex crime_index = ingest_crimes(crimes, crime_categories);
  store.components = build_component_table(store.graph, sensory, crime_index, tiers);
  store.geotags = std::move(geotags);
  store.geotag_warnings = sensory.warning_count();
  store.crime_warnings = crime_index.skipped;
  return store;
}

ScoreStore ingest(const IngestInputs& in) {
  if (in.osm_path.has_value() == in.segments_geojson_path.has_value())
    throw ValidationError("ingest needs exactly one of an OSM file or a segment GeoJSON file");
  StreetGraph graph;
  if (in.osm_path) {
    const OsmTagTable table = in.osm_tags_path ? OsmTagTable::from_json(read_file(*in.osm_tags_path)) : OsmTagTable::defaults();
    graph = load_osm_string(read_file(*in.osm_path), table);
  } else {
    graph = load_segments_geojson(read_file(*in.segments_geojson_path));
  }
  std::vector<GeoTagRecord> geotags;
  if (in.geotags_path) geotags = read_geotags_file(*in.geotags_path);
  CrimeCsv crimes;
  if (in.crimes_path) {
    std::ifstream f(*in.crimes_path, std::ios::binary);
    if (!f) throw Error("cannot open '" + *in.crimes_path + "'");
    crimes = read_crimes_csv(f);
  }
  const Lexicon lexicon = in.lexicon_path ? Lexicon::from_json(read_file(*in.lexicon_path)) : Lexicon::defaults();
  std::set<std::string> categories(in.crime_categories.begin(), in.crime_categories.end());
  if (categories.empty()) categories = default_person_crime_categories();
  ScoreStore store =
      ingest_graph(graph, std::move(geotags), crimes.records, lexicon, categories, in.assign_radius_m, in.tiers);
  store.crime_warnings += crimes.malformed;
  return store;
}

std::string encode_score_store(const ScoreStore& store) {
  Writer w;
  w.raw(kMagic, 4);
  w.u32(kVersion);

  w.u64(store.graph.nodes().size());
  for (const Node& n : store.graph.nodes()) {
    w.i64(n.id);
    w.f64(n.pos.lat);
    w.f64(n.pos.lon);
  }
  w.u64(store.graph.segments().size());
  for (const Segment& s : store.graph.segments()) {
    w.i64(s.id);
    w.i64(s.from_node);
    w.i64(s.to_node);
    w.u8(static_cast<std::uint8_t>(s.surface));
    w.u8(static_cast<std::uint8_t>(s.way_class));
    w.u32(static_cast<std::uint32_t>(s.sidewalk_count));
    w.u32(static_cast<std::uint32_t>(s.signal_count));
    w.u64(s.polyline.size());
    for (const LatLon& p : s.polyline) {
      w.f64(p.lat);
      w.f64(p.lon);
    }
  }
  w.u32(static_cast<std::uint32_t>(kColumns));
  for (std::size_t c = 0; c < kColumns; ++c)
    for (double v : store.components.raw[c]) w.f64(v);

  w.u64(store.geotags.size());
  for (const GeoTagRecord& r : store.geotags) {
    w.f64(r.pos.lat);
    w.f64(r.pos.lon);
    w.u64(r.tags.size());
    for (const auto& t : r.tags) w.str(t);
    w.u8(r.timestamp ? 1 : 0);
    if (r.timestamp) w.str(*r.timestamp);
  }
  w.u32(static_cast<std::uint32_t>(store.geotag_warnings));
  w.u32(static_cast<std::uint32_t>(store.crime_warnings));
  return w.take();
}

ScoreStore decode_score_store(std::string_view bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("not a score store");
  Reader r(bytes.substr(4));
  if (r.u32() != kVersion) throw FormatError("unsupported score store version");

  std::vector<Node> nodes(r.count(24));
  for (Node& n : nodes) {
    n.id = r.i64();
    n.pos.lat = r.f64();
    n.pos.lon = r.f64();
  }
  std::vector<Segment> segments(r.count(34));
  for (Segment& s : segments) {
    s.id = r.i64();
    s.from_node = r.i64();
    s.to_node = r.i64();
    const auto surface = r.u8();
    const auto cls = r.u8();
    if (surface > static_cast<std::uint8_t>(Surface::unknown) || cls > static_cast<std::uint8_t>(WayClass::extreme_traffic))
      throw FormatError("score store: bad enum value");
    s.surface = static_cast<Surface>(surface);
    s.way_class = static_cast<WayClass>(cls);
    s.sidewalk_count = static_cast<int>(r.u32());
    s.signal_count = static_cast<int>(r.u32());
    s.polyline.resize(r.count(16));
    for (LatLon& p : s.polyline) {
      p.lat = r.f64();
      p.lon = r.f64();
    }
  }
  ScoreStore store;
  store.graph = StreetGraph::build(std::move(nodes), std::move(segments));
  if (r.u32() != kColumns) throw FormatError("score store: column count mismatch");
  const std::size_t n = store.graph.segments().size();
  for (const Segment& s : store.graph.segments()) store.components.ids.push_back(s.id);
  for (std::size_t c = 0; c < kColumns; ++c) {
    store.components.raw[c].resize(n);
    for (double& v : store.components.raw[c]) v = r.f64();
  }
  renormalize(store.components);

  store.geotags.resize(r.count(25));
  for (GeoTagRecord& g : store.geotags) {
    g.pos.lat = r.f64();
    g.pos.lon = r.f64();
    g.tags.resize(r.count(4));
    for (auto& t : g.tags) t = r.str();
    if (r.u8()) g.timestamp = r.str();
  }
  store.geotag_warnings = static_cast<int>(r.u32());
  store.crime_warnings = static_cast<int>(r.u32());
  if (!r.done()) throw FormatError("score store: trailing bytes");
  return store;
}

void save_score_store(const ScoreStore& store, const std::string& path) { write_file(path, encode_score_store(store)); }

ScoreStore load_score_store(const std::string& path) { return decode_score_store(read_file(path)); }

}  // namespace runscape
