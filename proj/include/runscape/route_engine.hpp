#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "runscape/profile_weighting.hpp"
#include "runscape/street_graph.hpp"

namespace runscape {

/// A traversal of (part of) one segment. Offsets are measured from the
/// segment's from_node; from > to means the step runs backwards.
struct RouteStep {
  SegmentId segment_id = 0;
  std::size_t segment_index = 0;
  double from_offset_m = 0.0;
  double to_offset_m = 0.0;

  bool forward() const noexcept { return to_offset_m >= from_offset_m; }
  double length_m() const noexcept { return to_offset_m > from_offset_m ? to_offset_m - from_offset_m : from_offset_m - to_offset_m; }
};

struct Route {
  std::vector<RouteStep> steps;
  std::vector<LatLon> geometry;
  double length_m = 0.0;
  double total_cost = 0.0;
  double mean_desirability = 0.0;
  std::array<double, kDimensions> dimension_exposure{};
  ComponentRow component_exposure{};
  std::string profile;
  int heading_index = -1;  // set by round_trip

  bool empty() const noexcept { return steps.empty(); }
  std::vector<SegmentId> segment_ids() const;
};

struct RouteScore {
  double mean_desirability = 0.0;
  std::array<double, kDimensions> dimension_exposure{};
  ComponentRow component_exposure{};
};

struct RouteRequest {
  LatLon start;
  double target_length_m = 5000.0;
  std::string profile = "scenic";
  int k_headings = 8;
  double length_tolerance = 0.20;
  std::uint64_t seed = 0;

  void validate() const;  // throws ValidationError
};

struct RoundTripOptions {
  double chi = 0.8;               // crow-fly share of half the target length
  double overlap_penalty = 4.0;   // cost multiplier on outbound segments for the return leg
  double start_snap_radius_m = 500.0;
  double intermediate_snap_radius_m = 500.0;
  double desirability_tie = 1e-9;
  double length_tie_m = 1.0;
};

/// Per-segment cost multipliers, keyed by segment index. Values must be >= 1.
using CostPenalties = std::unordered_map<std::size_t, double>;

/// Every candidate loop produced during a round-trip sweep, in heading order.
struct RoundTripCandidate {
  int heading_index = 0;
  double heading_rad = 0.0;
  std::optional<Route> route;  // empty when the intermediate point did not snap or no path exists
  Route outbound;
  Route inbound;
};

/// Routes over a scored network under one profile and cost mode.
class Router {
 public:
  Router(std::shared_ptr<const ScoredNetwork> network, const WeightProfile& profile, CostMode mode = {},
         RoundTripOptions options = {});

  const ScoredNetwork& network() const noexcept { return *network_; }
  const ProfileScores& scores() const noexcept { return scores_; }
  const CostMode& mode() const noexcept { return mode_; }
  const RoundTripOptions& options() const noexcept { return options_; }
  const std::string& profile_name() const noexcept { return scores_.profile.name; }

  double cost_per_meter(std::size_t segment_index) const noexcept { return cpm_[segment_index]; }
  double heuristic_scale() const noexcept { return k_mode_; }

  /// Minimum-cost path (A*). Throws NoPathError when unreachable.
  Route shortest_path(const SegmentLocation& from, const SegmentLocation& to,
                      const CostPenalties* penalties = nullptr) const;

  std::vector<RoundTripCandidate> round_trip_candidates(const RouteRequest& request) const;

  /// Best closed loop of roughly the requested length. Throws NoRouteError.
  Route round_trip(const RouteRequest& request) const;

  RouteScore route_score(const Route& route) const;  // throws ValidationError on empty routes

  /// Heading rotation applied to the k-sweep for a given seed, in [0, 2pi/k).
  static double heading_offset(std::uint64_t seed, int k) noexcept;

 private:
  Route materialize(std::vector<RouteStep> steps, double cost) const;

  std::shared_ptr<const ScoredNetwork> network_;
  ProfileScores scores_;
  CostMode mode_;
  RoundTripOptions options_;
  std::vector<double> cpm_;
  double k_mode_ = 1.0;
};

/// Both builtin-profile routers over one shared network.
class RouteEngine {
 public:
  RouteEngine(std::shared_ptr<const ScoredNetwork> network, const BuiltinProfiles& profiles, CostMode mode = {},
              RoundTripOptions options = {});

  const Router& router(const std::string& profile) const;  // throws ValidationError
  Route route(const RouteRequest& request) const { return router(request.profile).round_trip(request); }
  const ScoredNetwork& network() const noexcept { return *network_; }
  std::shared_ptr<const ScoredNetwork> shared_network() const noexcept { return network_; }

 private:
  std::shared_ptr<const ScoredNetwork> network_;
  Router scenic_;
  Router urban_;
};

/// Concatenates two routes whose end/start coincide.
Route concat_steps(const Route& a, const Route& b);

/// Length of segment portions covered by both routes.
double shared_length_m(const Route& a, const Route& b);

nlohmann::json route_to_geojson(const Route& route);
nlohmann::json dimension_exposure_json(const std::array<double, kDimensions>& exposure);

}  // namespace runscape
