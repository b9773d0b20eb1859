#pragma once

#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "runscape/context_scores.hpp"
#include "runscape/profile_weighting.hpp"
#include "runscape/route_engine.hpp"
#include "runscape/score_store.hpp"
#include "runscape/sensory_scores.hpp"
#include "runscape/street_graph.hpp"

namespace fixtures {

using namespace runscape;

inline constexpr LatLon kOrigin{51.5000, -0.1200};

/// Point `north_m`/`east_m` away from `origin` along a local tangent plane.
LatLon offset(const LatLon& origin, double north_m, double east_m);

struct GridSpec {
  int rows = 15;
  int cols = 15;
  double spacing_m = 300.0;
  LatLon origin = kOrigin;
};

inline NodeId grid_node(const GridSpec& g, int r, int c) { return static_cast<NodeId>(r * g.cols + c + 1); }
LatLon grid_point(const GridSpec& g, double r, double c);

/// Lattice with straight segments; `decorate(seg, r, c, horizontal)` may set
/// attributes of the segment leaving (r, c) eastward or northward.
StreetGraph grid(const GridSpec& g, const std::function<void(Segment&, int, int, bool)>& decorate = {});

/// Grid with seeded random surfaces, signals, traffic tiers and geotags.
struct TexturedGrid {
  GridSpec spec;
  StreetGraph graph;
  std::vector<GeoTagRecord> geotags;
  std::vector<CrimeRecord> crimes;
};
TexturedGrid textured_grid(std::uint64_t seed, const GridSpec& spec = {});

/// Connected planar-ish graph with `n` nodes in a 3 km box: a random
/// spanning tree plus extra chords; some segments carry a bend.
StreetGraph random_connected(std::mt19937_64& rng, int n);

/// Random per-segment proxy table for a graph (valid normalized columns).
ComponentTable random_components(std::mt19937_64& rng, const StreetGraph& graph);

std::shared_ptr<const ScoredNetwork> scored(const ScoreStore& store);

/// City with a green corridor (east) and a busy high street (west).
struct CorridorCity {
  GridSpec spec;
  StreetGraph graph;
  std::vector<GeoTagRecord> geotags;
  std::vector<LatLon> starts;  // ten start points between the two
  int corridor_col_min = 0, high_street_col_max = 0;
};
CorridorCity corridor_city();

std::vector<GeoTagRecord> random_geotags(std::mt19937_64& rng, const StreetGraph& graph, int count,
                                         const std::vector<std::string>& vocabulary, double jitter_m = 20.0);

}  // namespace fixtures
