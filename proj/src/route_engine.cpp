#include "runscape/route_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>

#include "runscape/errors.hpp"
#include "runscape/geojson.hpp"

namespace runscape {

using nlohmann::json;

std::vector<SegmentId> Route::segment_ids() const {
  std::vector<SegmentId> out;
  out.reserve(steps.size());
  for (const RouteStep& s : steps) out.push_back(s.segment_id);
  return out;
}

void RouteRequest::validate() const {
  if (!is_valid(start)) throw ValidationError("start coordinates are invalid");
  if (!(target_length_m > 0.0) || !std::isfinite(target_length_m))
    throw ValidationError("target_length_m must be positive");
  if (k_headings < 1) throw ValidationError("k_headings must be at least 1");
  if (!(length_tolerance > 0.0 && length_tolerance < 1.0)) throw ValidationError("length_tolerance must lie in (0,1)");
  if (profile != "scenic" && profile != "urban") throw ValidationError("profile must be 'scenic' or 'urban'");
}

Router::Router(std::shared_ptr<const ScoredNetwork> network, const WeightProfile& profile, CostMode mode,
               RoundTripOptions options)
    : network_(std::move(network)), mode_(mode), options_(options) {
  if (!network_) throw ContractError("router needs a network");
  if (options_.overlap_penalty < 1.0) throw ValidationError("overlap penalty must be >= 1");
  if (mode_.kind == CostMode::Kind::detour_bounded && mode_.gamma < 0.0) throw ValidationError("gamma must be >= 0");
  if (mode_.kind == CostMode::Kind::paper_reciprocal && !(mode_.epsilon > 0.0))
    throw ValidationError("epsilon must be > 0");
  scores_ = network_->score(profile);
  cpm_.resize(scores_.d_raw.size());
  for (std::size_t i = 0; i < cpm_.size(); ++i) cpm_[i] = runscape::cost_per_meter(scores_.s_norm[i], scores_.d_raw[i], mode_);
  k_mode_ = min_cost_per_meter(scores_, mode_);
}

namespace {

struct Parent {
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  RouteStep step;
};

struct QueueEntry {
  double f;
  double g;
  std::size_t node;
  bool operator>(const QueueEntry& o) const {
    if (f != o.f) return f > o.f;
    return node > o.node;
  }
};

}  // namespace

Route Router::shortest_path(const SegmentLocation& from, const SegmentLocation& to,
                            const CostPenalties* penalties) const {
  const StreetGraph& g = network_->graph();
  const std::size_t n = g.nodes().size();
  const std::size_t src = n, dst = n + 1;
  const std::size_t fs = g.segment_index(from.segment_id);
  const std::size_t ts = g.segment_index(to.segment_id);
  const Segment& fseg = g.segments()[fs];
  const Segment& tseg = g.segments()[ts];
  const double fo = std::clamp(from.offset_m, 0.0, fseg.length_m);
  const double to_off = std::clamp(to.offset_m, 0.0, tseg.length_m);

  auto unit_cost = [&](std::size_t seg) {
    double c = cpm_[seg];
    if (penalties) {
      auto it = penalties->find(seg);
      if (it != penalties->end()) c *= it->second;
    }
    return c;
  };
  const double hscale = k_mode_ * (1.0 - 1e-12);
  auto heuristic = [&](std::size_t v) {
    if (v == dst) return 0.0;
    const LatLon& p = v == src ? from.point : g.nodes()[v].pos;
    return hscale * haversine_m(p, to.point);
  };

  std::vector<double> best(n + 2, std::numeric_limits<double>::infinity());
  std::vector<Parent> parent(n + 2);
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> open;
  best[src] = 0.0;
  open.push({heuristic(src), 0.0, src});

  auto relax = [&](std::size_t u, std::size_t v, double cost, std::size_t seg, double a, double b) {
    const double cand = best[u] + cost;
    if (cand < best[v]) {
      best[v] = cand;
      parent[v] = Parent{u, RouteStep{g.segments()[seg].id, seg, a, b}};
      open.push({cand + heuristic(v), cand, v});
    }
  };

  while (!open.empty()) {
    const QueueEntry e = open.top();
    open.pop();
    if (e.g > best[e.node]) continue;
    const std::size_t u = e.node;
    if (u == dst) break;
    if (u == src) {
      const double c = unit_cost(fs);
      relax(u, g.node_index(fseg.from_node), fo * c, fs, fo, 0.0);
      relax(u, g.node_index(fseg.to_node), (fseg.length_m - fo) * c, fs, fo, fseg.length_m);
      if (fs == ts) relax(u, dst, std::abs(to_off - fo) * c, fs, fo, to_off);
      continue;
    }
    for (const Arc& arc : g.arcs_from(u)) {
      const Segment& s = g.segments()[arc.segment];
      relax(u, arc.target, s.length_m * unit_cost(arc.segment), arc.segment, arc.forward ? 0.0 : s.length_m,
            arc.forward ? s.length_m : 0.0);
    }
    const double ct = unit_cost(ts);
    if (g.nodes()[u].id == tseg.from_node) relax(u, dst, to_off * ct, ts, 0.0, to_off);
    if (g.nodes()[u].id == tseg.to_node) relax(u, dst, (tseg.length_m - to_off) * ct, ts, tseg.length_m, to_off);
  }

  if (!std::isfinite(best[dst]))
    throw NoPathError("no path from segment " + std::to_string(from.segment_id) + " to segment " +
                      std::to_string(to.segment_id));

  std::vector<RouteStep> steps;
  for (std::size_t v = dst; v != src; v = parent[v].prev) {
    const RouteStep& st = parent[v].step;
    if (st.length_m() > 1e-9) steps.push_back(st);
  }
  std::reverse(steps.begin(), steps.end());
  return materialize(std::move(steps), best[dst]);
}

Route Router::materialize(std::vector<RouteStep> steps, double cost) const {
  Route r;
  r.steps = std::move(steps);
  r.total_cost = cost;
  r.profile = scores_.profile.name;
  const auto segs = network_->graph().segments();
  for (const RouteStep& st : r.steps) {
    r.length_m += st.length_m();
    const auto piece = slice_polyline(segs[st.segment_index].polyline, st.from_offset_m, st.to_offset_m);
    for (const LatLon& p : piece)
      if (r.geometry.empty() || haversine_m(r.geometry.back(), p) > 1e-6) r.geometry.push_back(p);
  }
  if (!r.steps.empty()) {
    const RouteScore sc = route_score(r);
    r.mean_desirability = sc.mean_desirability;
    r.dimension_exposure = sc.dimension_exposure;
    r.component_exposure = sc.component_exposure;
  }
  return r;
}

RouteScore Router::route_score(const Route& route) const {
  RouteScore out;
  double total = 0.0;
  const ComponentTable& table = network_->components();
  for (const RouteStep& st : route.steps) {
    const double w = st.length_m();
    const std::size_t i = st.segment_index;
    total += w;
    out.mean_desirability += w * scores_.s_norm[i];
    for (std::size_t d = 0; d < kDimensions; ++d) out.dimension_exposure[d] += w * scores_.dimensions[i][d];
    for (std::size_t c = 0; c < kColumns; ++c) out.component_exposure[c] += w * table.norm[c][i];
  }
  if (!(total > 0.0)) throw ValidationError("cannot score an empty route");
  out.mean_desirability = std::clamp(out.mean_desirability / total, 0.0, 1.0);
  for (double& v : out.dimension_exposure) v /= total;
  for (double& v : out.component_exposure) v /= total;
  return out;
}

double Router::heading_offset(std::uint64_t seed, int k) noexcept {
  // splitmix64 finalizer; stable across platforms, unlike std distributions.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  const double u = static_cast<double>(z >> 11) * 0x1.0p-53;
  return u * 2.0 * kPi / std::max(1, k);
}

std::vector<RoundTripCandidate> Router::round_trip_candidates(const RouteRequest& request) const {
  request.validate();
  const StreetGraph& g = network_->graph();
  const SegmentLocation start =
      snap_point(g, request.start.lat, request.start.lon, options_.start_snap_radius_m);
  const double rot = heading_offset(request.seed, request.k_headings);
  const double reach = options_.chi * request.target_length_m / 2.0;

  std::vector<RoundTripCandidate> out;
  out.reserve(static_cast<std::size_t>(request.k_headings));
  for (int m = 0; m < request.k_headings; ++m) {
    RoundTripCandidate c;
    c.heading_index = m;
    c.heading_rad = 2.0 * kPi * m / request.k_headings + rot;
    const LatLon target = destination_point(start.point, c.heading_rad, reach);
    try {
      const SegmentLocation mid = snap_point(g, target.lat, target.lon, options_.intermediate_snap_radius_m);
      c.outbound = shortest_path(start, mid);
      CostPenalties penalties;
      for (const RouteStep& st : c.outbound.steps) penalties[st.segment_index] = options_.overlap_penalty;
      c.inbound = shortest_path(mid, start, &penalties);
      Route loop = concat_steps(c.outbound, c.inbound);
      loop = materialize(std::move(loop.steps), c.outbound.total_cost + c.inbound.total_cost);
      loop.heading_index = m;
      c.route = std::move(loop);
    } catch (const NoSnapError&) {
    } catch (const NoPathError&) {
    }
    out.push_back(std::move(c));
  }
  return out;
}

Route Router::round_trip(const RouteRequest& request) const {
  const auto candidates = round_trip_candidates(request);
  const double target = request.target_length_m;
  const double slack = request.length_tolerance * target;

  const Route* best = nullptr;
  const Route* closest = nullptr;
  for (const RoundTripCandidate& c : candidates) {
    if (!c.route || c.route->empty()) continue;
    const Route& r = *c.route;
    if (!closest || std::abs(r.length_m - target) < std::abs(closest->length_m - target)) closest = &r;
    if (std::abs(r.length_m - target) > slack) continue;
    if (!best) {
      best = &r;
      continue;
    }
    const double dd = r.mean_desirability - best->mean_desirability;
    if (dd > options_.desirability_tie) {
      best = &r;
    } else if (std::abs(dd) <= options_.desirability_tie) {
      const double err = std::abs(r.length_m - target);
      const double best_err = std::abs(best->length_m - target);
      // Candidates arrive in heading order, so equal errors keep the lower index.
      if (err < best_err - options_.length_tie_m) best = &r;
    }
  }
  if (!closest) throw NoRouteError("no heading produced a loop (intermediate points unsnappable or unreachable)");
  if (!best)
    throw NoRouteError("no loop within " + std::to_string(request.length_tolerance * 100.0) +
                           "% of the target length; closest was " + std::to_string(closest->length_m) + " m",
                       closest->length_m);
  return *best;
}

RouteEngine::RouteEngine(std::shared_ptr<const ScoredNetwork> network, const BuiltinProfiles& profiles, CostMode mode,
                         RoundTripOptions options)
    : network_(network), scenic_(network, profiles.scenic, mode, options), urban_(network, profiles.urban, mode, options) {}

const Router& RouteEngine::router(const std::string& profile) const {
  if (profile == "scenic") return scenic_;
  if (profile == "urban") return urban_;
  throw ValidationError("profile must be 'scenic' or 'urban'");
}

Route concat_steps(const Route& a, const Route& b) {
  Route r;
  r.steps = a.steps;
  r.steps.insert(r.steps.end(), b.steps.begin(), b.steps.end());
  r.total_cost = a.total_cost + b.total_cost;
  r.profile = a.profile;
  return r;
}

namespace {

std::map<std::size_t, std::vector<std::pair<double, double>>> coverage(const Route& r) {
  std::map<std::size_t, std::vector<std::pair<double, double>>> out;
  for (const RouteStep& st : r.steps)
    out[st.segment_index].emplace_back(std::min(st.from_offset_m, st.to_offset_m),
                                       std::max(st.from_offset_m, st.to_offset_m));
  for (auto& [seg, iv] : out) {
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& x : iv) {
      if (!merged.empty() && x.first <= merged.back().second)
        merged.back().second = std::max(merged.back().second, x.second);
      else
        merged.push_back(x);
    }
    iv = std::move(merged);
  }
  return out;
}

}  // namespace

double shared_length_m(const Route& a, const Route& b) {
  const auto ca = coverage(a);
  const auto cb = coverage(b);
  double shared = 0.0;
  for (const auto& [seg, ia] : ca) {
    auto it = cb.find(seg);
    if (it == cb.end()) continue;
    for (const auto& x : ia)
      for (const auto& y : it->second) shared += std::max(0.0, std::min(x.second, y.second) - std::max(x.first, y.first));
  }
  return shared;
}

json dimension_exposure_json(const std::array<double, kDimensions>& exposure) {
  json j = json::object();
  for (Dimension d : kAllDimensions) j[std::string(to_string(d))] = exposure[static_cast<std::size_t>(d)];
  return j;
}

json route_to_geojson(const Route& route) {
  return {{"type", "Feature"},
          {"geometry", {{"type", "LineString"}, {"coordinates", line_coordinates(route.geometry)}}},
          {"properties",
           {{"length_m", route.length_m},
            {"profile", route.profile},
            {"mean_desirability", route.mean_desirability},
            {"dimension_exposure", dimension_exposure_json(route.dimension_exposure)},
            {"total_cost", route.total_cost},
            {"segment_ids", route.segment_ids()}}}};
}

}  // namespace runscape
