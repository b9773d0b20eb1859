#include "fixtures.hpp"

#include <algorithm>
#include <numeric>

namespace fixtures {

LatLon offset(const LatLon& origin, double north_m, double east_m) {
  return {origin.lat + meters_to_lat_deg(north_m), origin.lon + meters_to_lon_deg(east_m, origin.lat)};
}

LatLon grid_point(const GridSpec& g, double r, double c) { return offset(g.origin, r * g.spacing_m, c * g.spacing_m); }

StreetGraph grid(const GridSpec& g, const std::function<void(Segment&, int, int, bool)>& decorate) {
  std::vector<Node> nodes;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) nodes.push_back({grid_node(g, r, c), grid_point(g, r, c)});
  std::vector<Segment> segs;
  SegmentId next = 1;
  auto add = [&](int r0, int c0, int r1, int c1, bool horizontal) {
    Segment s;
    s.id = next++;
    s.from_node = grid_node(g, r0, c0);
    s.to_node = grid_node(g, r1, c1);
    s.polyline = {grid_point(g, r0, c0), grid_point(g, r1, c1)};
    s.surface = Surface::pavement;
    if (decorate) decorate(s, r0, c0, horizontal);
    segs.push_back(std::move(s));
  };
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      if (c + 1 < g.cols) add(r, c, r, c + 1, true);
      if (r + 1 < g.rows) add(r, c, r + 1, c, false);
    }
  return StreetGraph::build(std::move(nodes), std::move(segs));
}

std::vector<GeoTagRecord> random_geotags(std::mt19937_64& rng, const StreetGraph& graph, int count,
                                         const std::vector<std::string>& vocabulary, double jitter_m) {
  std::vector<GeoTagRecord> out;
  if (graph.empty() || vocabulary.empty()) return out;
  std::uniform_int_distribution<std::size_t> pick_seg(0, graph.segments().size() - 1);
  std::uniform_int_distribution<std::size_t> pick_word(0, vocabulary.size() - 1);
  std::uniform_int_distribution<int> ntags(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0), j(-jitter_m, jitter_m);
  for (int i = 0; i < count; ++i) {
    const Segment& s = graph.segments()[pick_seg(rng)];
    const LatLon on = interpolate_along(s.polyline, u(rng) * s.length_m);
    GeoTagRecord rec;
    rec.pos = offset(on, j(rng), j(rng));
    const int k = ntags(rng);
    for (int t = 0; t < k; ++t) rec.tags.push_back(vocabulary[pick_word(rng)]);
    out.push_back(std::move(rec));
  }
  return out;
}

TexturedGrid textured_grid(std::uint64_t seed, const GridSpec& spec) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  TexturedGrid t;
  t.spec = spec;
  t.graph = grid(spec, [&](Segment& s, int, int, bool) {
    const double x = u(rng);
    s.surface = x < 0.2 ? Surface::grass : x < 0.6 ? Surface::pavement : x < 0.7 ? Surface::sand
                                          : x < 0.85 ? Surface::park_path
                                                     : Surface::unknown;
    s.signal_count = static_cast<int>(u(rng) * 3.0);
    if (u(rng) < 0.25) {
      s.way_class = WayClass::high_traffic;
      s.sidewalk_count = 1 + static_cast<int>(u(rng) * 2.0);
    }
  });
  static const std::vector<std::string> vocab = {"tree",   "birds",  "flowers", "river", "people", "crowd",  "food",
                                                 "cafe",   "music",  "car",     "bus",   "traffic", "quiet", "happy",
                                                 "lovely", "dirty",  "graffiti", "dog",  "plastic", "paint", "street"};
  t.geotags = random_geotags(rng, t.graph, 1500, vocab);
  const double span_n = (spec.rows - 1) * spec.spacing_m, span_e = (spec.cols - 1) * spec.spacing_m;
  for (int i = 0; i < 300; ++i) {
    CrimeRecord c;
    c.pos = offset(spec.origin, u(rng) * span_n, u(rng) * span_e);
    c.category = u(rng) < 0.7 ? "Violence and sexual offences" : "Anti-social behaviour";
    c.month = "2023-06";
    t.crimes.push_back(std::move(c));
  }
  return t;
}

StreetGraph random_connected(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Node> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({static_cast<NodeId>(100 + i), offset(kOrigin, u(rng) * 3000.0, u(rng) * 3000.0)});
  std::vector<Segment> segs;
  SegmentId next = 1;
  auto add = [&](int a, int b) {
    Segment s;
    s.id = next++;
    s.from_node = nodes[static_cast<std::size_t>(a)].id;
    s.to_node = nodes[static_cast<std::size_t>(b)].id;
    const LatLon pa = nodes[static_cast<std::size_t>(a)].pos, pb = nodes[static_cast<std::size_t>(b)].pos;
    s.polyline = {pa};
    if (u(rng) < 0.3) {
      const LatLon mid{(pa.lat + pb.lat) / 2, (pa.lon + pb.lon) / 2};
      s.polyline.push_back(offset(mid, (u(rng) - 0.5) * 80.0, (u(rng) - 0.5) * 80.0));
    }
    s.polyline.push_back(pb);
    s.surface = kKnownSurfaces[static_cast<std::size_t>(u(rng) * 4.0) % 4];
    segs.push_back(std::move(s));
  };
  // Spanning tree: each node links to a near earlier node.
  for (int i = 1; i < n; ++i) {
    int best = 0;
    double best_d = 1e18;
    for (int j = 0; j < i; ++j) {
      const double d = haversine_m(nodes[static_cast<std::size_t>(i)].pos, nodes[static_cast<std::size_t>(j)].pos) *
                       (0.5 + u(rng));
      if (d < best_d) best_d = d, best = j;
    }
    add(best, i);
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int e = 0; e < n; ++e) {
    const int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (haversine_m(nodes[static_cast<std::size_t>(a)].pos, nodes[static_cast<std::size_t>(b)].pos) > 900.0) continue;
    add(a, b);
  }
  return StreetGraph::build(std::move(nodes), std::move(segs));
}

ComponentTable random_components(std::mt19937_64& rng, const StreetGraph& graph) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ComponentTable t;
  const std::size_t n = graph.segments().size();
  for (const Segment& s : graph.segments()) t.ids.push_back(s.id);
  for (std::size_t c = 0; c < kColumns; ++c) {
    t.raw[c].resize(n);
    for (double& v : t.raw[c]) v = u(rng);
  }
  renormalize(t);
  return t;
}

std::shared_ptr<const ScoredNetwork> scored(const ScoreStore& store) {
  return std::make_shared<const ScoredNetwork>(store.graph, store.components);
}

CorridorCity corridor_city() {
  CorridorCity city;
  city.spec = {25, 13, 200.0, kOrigin};
  city.high_street_col_max = 2;
  city.corridor_col_min = 10;
  const GridSpec& g = city.spec;
  auto zone = [&](int c0, int c1) {
    if (c0 <= city.high_street_col_max && c1 <= city.high_street_col_max) return 0;
    if (c0 >= city.corridor_col_min && c1 >= city.corridor_col_min) return 2;
    return 1;
  };
  city.graph = grid(g, [&](Segment& s, int, int c, bool horizontal) {
    switch (zone(c, horizontal ? c + 1 : c)) {
      case 0:  // high street
        s.surface = Surface::pavement;
        s.way_class = WayClass::low_traffic;
        s.signal_count = 0;
        break;
      case 2:  // green corridor
        s.surface = Surface::grass;
        s.way_class = WayClass::low_traffic;
        s.signal_count = 0;
        break;
      default:  // ordinary busy streets
        s.surface = Surface::unknown;
        s.way_class = WayClass::high_traffic;
        s.sidewalk_count = 1;
        s.signal_count = 2;
    }
  });

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<std::string> street_words = {"people", "crowd", "market", "food", "restaurant", "cafe", "music", "busker"};
  const std::vector<std::string> green_words = {"tree", "trees", "birds", "flowers", "garden", "leaves", "stream"};
  const std::vector<std::string> busy_words = {"car", "bus", "traffic", "exhaust"};
  for (const Segment& s : city.graph.segments()) {
    const int c0 = static_cast<int>((s.from_node - 1) % g.cols);
    const int c1 = static_cast<int>((s.to_node - 1) % g.cols);
    const int z = zone(c0, c1);
    const int photos = z == 0 ? 30 : z == 2 ? 20 : 2;
    for (int p = 0; p < photos; ++p) {
      GeoTagRecord rec;
      rec.pos = interpolate_along(s.polyline, (0.1 + 0.8 * u(rng)) * s.length_m);
      const auto& words = z == 0 ? street_words : z == 2 ? green_words : busy_words;
      rec.tags = {words[static_cast<std::size_t>(u(rng) * words.size()) % words.size()],
                  words[static_cast<std::size_t>(u(rng) * words.size()) % words.size()]};
      if (z == 0) rec.tags.push_back("happy");
      if (z == 2 && p % 2 == 0) rec.tags.push_back("lovely");
      if (z == 1) rec.tags.push_back("dirty");
      city.geotags.push_back(std::move(rec));
    }
  }
  for (int i = 0; i < 10; ++i) city.starts.push_back(grid_point(g, 8.3 + i, 6.0));
  return city;
}

}  // namespace fixtures
