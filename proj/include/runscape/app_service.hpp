#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "runscape/persistence.hpp"
#include "runscape/route_analysis.hpp"
#include "runscape/route_engine.hpp"
#include "runscape/score_store.hpp"

namespace runscape {

struct ServiceConfig {
  // Exactly one of a prebuilt score store or raw inputs.
  std::optional<std::string> score_store_path;
  std::optional<IngestInputs> inputs;

  std::string database_path = "runscape.db";
  std::optional<std::string> profiles_path;
  std::optional<std::string> questionnaire_path;
  std::optional<std::string> query_points_path;

  CostMode cost_mode;
  RoundTripOptions round_trip;
  int k_headings = 8;
  double length_tolerance = 0.20;

  double analysis_length_m = 5000.0;
  int min_count = kDefaultMinTagCount;
  double smoothing = kDefaultTagSmoothing;
  unsigned threads = 0;

  std::string host = "127.0.0.1";
  int port = 8080;

  /// Relative paths resolve against `base_dir`. Throws FormatError on bad
  /// values and Error when a named dataset file does not exist.
  static ServiceConfig from_json(const nlohmann::json& j, const std::string& base_dir = ".");
  static ServiceConfig load(const std::string& path);
};

/// Questionnaire items per phase, served verbatim from the asset.
class Questionnaire {
 public:
  static Questionnaire from_json(const nlohmann::json& doc);  // throws FormatError
  static Questionnaire load(const std::string& path);
  static Questionnaire builtin();  // the asset compiled in

  /// [{id, aspect, text}] for the short (S1-S3) or long (L1-L13) form.
  nlohmann::json items(ErsPhase phase, bool long_form = false) const;
  const nlohmann::json& document() const noexcept { return doc_; }

 private:
  nlohmann::json doc_;
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Request handlers, independent of the HTTP transport so they can be
/// exercised directly. All handlers are safe to call concurrently.
class AppService {
 public:
  AppService(std::shared_ptr<const ScoreStore> store, const BuiltinProfiles& profiles, const ServiceConfig& config,
             Questionnaire questionnaire = Questionnaire::builtin());

  /// Loads datasets, profiles, questionnaire and database named by the config.
  static std::unique_ptr<AppService> from_config(const ServiceConfig& config);

  HttpResponse post_route(const std::string& body);
  HttpResponse get_route(const std::string& route_id) const;
  HttpResponse questionnaire(const std::string& phase, const std::string& form = "short") const;
  HttpResponse post_ers(const std::string& body);
  HttpResponse get_ers(const std::string& id) const;
  HttpResponse list_ers(const std::optional<std::string>& route_id) const;
  HttpResponse importance();
  HttpResponse segment_scores(const std::optional<std::string>& bbox, const std::string& profile) const;

  /// Parses {lat, lon, length_m, profile, k, seed} with config defaults.
  RouteRequest parse_route_request(const nlohmann::json& body) const;
  /// Deterministic id for a request against this dataset and configuration.
  std::string route_id_for(const RouteRequest& request) const;

  const RouteEngine& engine() const noexcept { return *engine_; }
  const Store& store() const noexcept { return *db_; }
  const ServiceConfig& config() const noexcept { return config_; }

  /// Blocks serving HTTP on config().host:config().port.
  void serve();

 private:
  nlohmann::json canonical_request(const RouteRequest& request) const;

  ServiceConfig config_;
  std::shared_ptr<const ScoreStore> data_;
  std::unique_ptr<RouteEngine> engine_;
  std::unique_ptr<Store> db_;
  Questionnaire questionnaire_;
  TagCorpus corpus_;
  std::string fingerprint_;

  std::once_flag importance_once_;
  HttpResponse importance_cache_;
};

std::optional<BoundingBox> parse_bbox(const std::string& text);  // "min_lon,min_lat,max_lon,max_lat"

}  // namespace runscape
