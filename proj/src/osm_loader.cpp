#include <algorithm>
#include <cstring>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <expat.h>

#include <nlohmann/json.hpp>
#include "runscape/errors.hpp"
#include "runscape/street_graph.hpp"

namespace runscape {

OsmTagTable OsmTagTable::defaults() {
  OsmTagTable t;
  for (const char* k : {"footway", "path", "pedestrian", "residential", "track"}) t.highway[k] = WayClass::low_traffic;
  for (const char* k : {"primary", "secondary", "tertiary", "unclassified"}) t.highway[k] = WayClass::high_traffic;
  for (const char* k : {"motorway", "trunk"}) t.highway[k] = WayClass::extreme_traffic;
  t.surface["grass"] = Surface::grass;
  t.surface["paved"] = Surface::pavement;
  t.surface["asphalt"] = Surface::pavement;
  t.surface["sand"] = Surface::sand;
  t.signal_values = {"traffic_signals", "stop", "give_way"};
  return t;
}

OsmTagTable OsmTagTable::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tag table: ") + e.what());
  }
  OsmTagTable t;
  try {
    for (const auto& [k, v] : j.at("highway").items()) t.highway[k] = parse_way_class(v.get<std::string>());
    for (const auto& [k, v] : j.at("surface").items()) t.surface[k] = parse_surface(v.get<std::string>());
    for (const auto& v : j.at("signal_values")) t.signal_values.insert(v.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tag table: ") + e.what());
  }
  return t;
}

namespace {

using Tags = std::unordered_map<std::string, std::string>;

struct RawNode {
  LatLon pos;
  Tags tags;
};

struct RawWay {
  std::int64_t id = 0;
  std::vector<NodeId> refs;
  Tags tags;
};

enum class Context { none, node, way, other };

struct ParseState {
  XML_Parser parser = nullptr;
  std::unordered_map<NodeId, RawNode> nodes;
  std::vector<RawWay> ways;
  Context ctx = Context::none;
  NodeId current_node = 0;
  std::string error;
  long error_line = -1;
};

const char* attr(const XML_Char** atts, const char* name) {
  for (int i = 0; atts[i]; i += 2)
    if (std::strcmp(atts[i], name) == 0) return atts[i + 1];
  return nullptr;
}

void fail(ParseState& st, std::string msg) {
  if (st.error.empty()) {
    st.error = std::move(msg);
    st.error_line = static_cast<long>(XML_GetCurrentLineNumber(st.parser));
  }
  XML_StopParser(st.parser, XML_FALSE);
}

bool parse_i64(const char* s, std::int64_t& out) {
  if (!s) return false;
  char* end = nullptr;
  out = std::strtoll(s, &end, 10);
  return end != s && *end == '\0';
}

bool parse_f64(const char* s, double& out) {
  if (!s) return false;
  char* end = nullptr;
  out = std::strtod(s, &end);
  return end != s && *end == '\0';
}

void XMLCALL on_start(void* data, const XML_Char* name, const XML_Char** atts) {
  auto& st = *static_cast<ParseState*>(data);
  if (std::strcmp(name, "node") == 0) {
    std::int64_t id = 0;
    double lat = 0, lon = 0;
    if (!parse_i64(attr(atts, "id"), id) || !parse_f64(attr(atts, "lat"), lat) || !parse_f64(attr(atts, "lon"), lon))
      return fail(st, "node element needs numeric id, lat and lon");
    if (!is_valid({lat, lon})) return fail(st, "node " + std::to_string(id) + " has out-of-range coordinates");
    st.nodes[id] = RawNode{{lat, lon}, {}};
    st.current_node = id;
    st.ctx = Context::node;
  } else if (std::strcmp(name, "way") == 0) {
    std::int64_t id = 0;
    if (!parse_i64(attr(atts, "id"), id)) return fail(st, "way element needs a numeric id");
    st.ways.push_back(RawWay{id, {}, {}});
    st.ctx = Context::way;
  } else if (std::strcmp(name, "nd") == 0) {
    if (st.ctx != Context::way) return;
    std::int64_t ref = 0;
    if (!parse_i64(attr(atts, "ref"), ref)) return fail(st, "nd element needs a numeric ref");
    st.ways.back().refs.push_back(ref);
  } else if (std::strcmp(name, "tag") == 0) {
    const char* k = attr(atts, "k");
    const char* v = attr(atts, "v");
    if (!k || !v) return fail(st, "tag element needs k and v");
    if (st.ctx == Context::node)
      st.nodes[st.current_node].tags[k] = v;
    else if (st.ctx == Context::way)
      st.ways.back().tags[k] = v;
  } else if (std::strcmp(name, "relation") == 0) {
    st.ctx = Context::other;
  }
}

void XMLCALL on_end(void* data, const XML_Char* name) {
  auto& st = *static_cast<ParseState*>(data);
  if (std::strcmp(name, "node") == 0 || std::strcmp(name, "way") == 0 || std::strcmp(name, "relation") == 0)
    st.ctx = Context::none;
}

std::string tag_or(const Tags& tags, const std::string& key, const std::string& fallback = {}) {
  auto it = tags.find(key);
  return it == tags.end() ? fallback : it->second;
}

int sidewalk_count(const Tags& tags) {
  const std::string v = tag_or(tags, "sidewalk");
  if (v == "both") return 2;
  if (v == "left" || v == "right" || v == "yes" || v == "separate") return 1;
  if (tag_or(tags, "sidewalk:both") == "yes" || tag_or(tags, "sidewalk:both") == "separate") return 2;
  int n = 0;
  for (const char* side : {"sidewalk:left", "sidewalk:right"}) {
    const std::string s = tag_or(tags, side);
    if (s == "yes" || s == "separate") ++n;
  }
  return n;
}

// Even-odd ray cast in lon/lat; adequate for park polygons at city scale.
bool inside_ring(const LatLon& p, const std::vector<LatLon>& ring) {
  bool in = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const LatLon& a = ring[i];
    const LatLon& b = ring[j];
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      const double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
      if (p.lon < x) in = !in;
    }
  }
  return in;
}

}  // namespace

StreetGraph load_osm_string(std::string_view xml, const OsmTagTable& table) {
  ParseState st;
  st.parser = XML_ParserCreate(nullptr);
  XML_SetUserData(st.parser, &st);
  XML_SetElementHandler(st.parser, on_start, on_end);
  const XML_Status status = XML_Parse(st.parser, xml.data(), static_cast<int>(xml.size()), XML_TRUE);
  if (status != XML_STATUS_OK && st.error.empty()) {
    st.error = std::string("malformed OSM XML: ") + XML_ErrorString(XML_GetErrorCode(st.parser));
    st.error_line = static_cast<long>(XML_GetCurrentLineNumber(st.parser));
  }
  XML_ParserFree(st.parser);
  if (!st.error.empty()) throw ParseError(st.error, st.error_line);

  // Park areas for the park_path surface.
  std::vector<std::vector<LatLon>> parks;
  std::unordered_set<NodeId> park_nodes;
  for (const RawWay& w : st.ways) {
    if (tag_or(w.tags, "leisure") != "park" || w.refs.size() < 4 || w.refs.front() != w.refs.back()) continue;
    std::vector<LatLon> ring;
    for (NodeId r : w.refs) {
      auto it = st.nodes.find(r);
      if (it != st.nodes.end()) ring.push_back(it->second.pos);
      park_nodes.insert(r);
    }
    if (ring.size() >= 4) parks.push_back(std::move(ring));
  }

  struct Routable {
    const RawWay* way;
    std::vector<NodeId> refs;  // refs resolvable to nodes
    WayClass cls;
  };
  std::vector<Routable> routable;
  for (const RawWay& w : st.ways) {
    auto hw = table.highway.find(tag_or(w.tags, "highway"));
    if (hw == table.highway.end() || tag_or(w.tags, "area") == "yes") continue;
    std::vector<NodeId> refs;
    for (NodeId r : w.refs)
      if (st.nodes.count(r)) refs.push_back(r);
    if (refs.size() < 2) continue;
    routable.push_back({&w, std::move(refs), hw->second});
  }
  if (routable.empty()) throw EmptyGraphError("OSM input contains no routable way");

  std::unordered_map<NodeId, int> uses;
  for (const Routable& r : routable) {
    for (NodeId n : r.refs) ++uses[n];
    // Endpoints always split.
    uses[r.refs.front()] += 2;
    uses[r.refs.back()] += 2;
  }

  std::vector<Node> nodes;
  std::unordered_set<NodeId> emitted;
  std::vector<Segment> segments;
  SegmentId next_id = 0;

  for (const Routable& r : routable) {
    const Tags& tags = r.way->tags;
    Surface surface = Surface::unknown;
    if (auto it = table.surface.find(tag_or(tags, "surface")); it != table.surface.end()) surface = it->second;
    if (surface == Surface::unknown) {
      bool park = tag_or(tags, "leisure") == "park";
      for (std::size_t i = 0; !park && i < r.refs.size(); ++i) park = park_nodes.count(r.refs[i]) > 0;
      if (!park) {
        std::vector<LatLon> line;
        for (NodeId n : r.refs) line.push_back(st.nodes.at(n).pos);
        const LatLon mid = interpolate_along(line, polyline_length_m(line) / 2.0);
        for (const auto& ring : parks)
          if (inside_ring(mid, ring)) park = true;
      }
      if (park) surface = Surface::park_path;
    }
    const int sidewalks = sidewalk_count(tags);

    std::size_t start = 0;
    for (std::size_t i = 1; i < r.refs.size(); ++i) {
      if (uses[r.refs[i]] < 2 && i + 1 < r.refs.size()) continue;
      Segment s;
      s.from_node = r.refs[start];
      s.to_node = r.refs[i];
      for (std::size_t k = start; k <= i; ++k) {
        const RawNode& rn = st.nodes.at(r.refs[k]);
        s.polyline.push_back(rn.pos);
        if (table.signal_values.count(tag_or(rn.tags, "highway")) ||
            table.signal_values.count(tag_or(rn.tags, "crossing")))
          ++s.signal_count;
      }
      start = i;
      s.length_m = polyline_length_m(s.polyline);
      if (!(s.length_m > 0.0)) continue;
      s.id = next_id++;
      s.surface = surface;
      s.way_class = r.cls;
      s.sidewalk_count = sidewalks;
      for (NodeId n : {s.from_node, s.to_node})
        if (emitted.insert(n).second) nodes.push_back(Node{n, st.nodes.at(n).pos});
      segments.push_back(std::move(s));
    }
  }
  if (segments.empty()) throw EmptyGraphError("OSM input contains no routable way");
  return StreetGraph::build(std::move(nodes), std::move(segments));
}

StreetGraph load_osm(std::istream& source, const OsmTagTable& table) {
  std::ostringstream buf;
  buf << source.rdbuf();
  return load_osm_string(buf.str(), table);
}

}  // namespace runscape
