#include "runscape/app_service.hpp"

#include <httplib.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "runscape/errors.hpp"
#include "runscape/text.hpp"

namespace runscape {

extern const char* const kErsQuestionnaireJson;  // generated from data/ers_questionnaire.json

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  const fs::path path(p);
  const std::string out = path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
  return out;
}

std::string existing(const std::string& base, const json& v, const std::string& key) {
  if (!v.is_string()) throw FormatError("config: '" + key + "' must be a path string");
  std::string p = resolve(base, v.get<std::string>());
  if (!fs::exists(p)) throw Error("config: dataset '" + key + "' not found at " + p);
  return p;
}

template <class T>
T number(const json& j, const std::string& key) {
  if (!j.is_number()) throw FormatError("config: '" + key + "' must be a number");
  return j.get<T>();
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, _] : obj.items())
    if (!allowed.count(k)) throw FormatError("config: unknown key '" + k + "' in " + where);
}

HttpResponse json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_response(int status, const std::string& message, json extra = json::object()) {
  extra["error"] = message;
  return json_response(status, extra);
}

// Runs a handler, mapping library errors onto status codes.
template <class F>
HttpResponse guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    return error_response(400, std::string("malformed JSON: ") + e.what());
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  } catch (const UnknownKeyError& e) {
    return error_response(400, e.what());
  } catch (const NoSnapError& e) {
    return error_response(422, e.what());
  } catch (const NoRouteError& e) {
    json extra = json::object();
    if (e.closest_length_m() >= 0) extra["closest_length_m"] = e.closest_length_m();
    return error_response(422, e.what(), extra);
  } catch (const BatchError& e) {
    return error_response(422, e.what());
  } catch (const Error& e) {
    return error_response(500, e.what());
  }
}

json route_metrics(const Route& r) {
  return {{"length_m", r.length_m},
          {"mean_desirability", r.mean_desirability},
          {"total_cost", r.total_cost},
          {"profile", r.profile},
          {"heading_index", r.heading_index},
          {"closed", true},
          {"dimension_exposure", dimension_exposure_json(r.dimension_exposure)}};
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const json& j, const std::string& base) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  reject_unknown(j,
                 {"score_store", "datasets", "database", "profiles", "questionnaire", "query_points", "cost_mode", "gamma",
                  "epsilon", "chi", "overlap_penalty", "k", "tolerance", "start_snap_radius_m",
                  "intermediate_snap_radius_m", "analysis", "host", "port"},
                 "top level");
  if (j.contains("score_store") == j.contains("datasets"))
    throw FormatError("config: name exactly one of 'score_store' or 'datasets'");
  ServiceConfig c;
  if (j.contains("score_store")) c.score_store_path = existing(base, j["score_store"], "score_store");
  if (j.contains("datasets")) {
    const json& d = j["datasets"];
    if (!d.is_object()) throw FormatError("config: 'datasets' must be an object");
    reject_unknown(d,
                   {"osm", "segments_geojson", "geotags", "crimes", "lexicon", "osm_tags", "crime_categories",
                    "assign_radius_m"},
                   "datasets");
    IngestInputs in;
    if (d.contains("osm")) in.osm_path = existing(base, d["osm"], "osm");
    if (d.contains("segments_geojson")) in.segments_geojson_path = existing(base, d["segments_geojson"], "segments_geojson");
    if (d.contains("geotags")) in.geotags_path = existing(base, d["geotags"], "geotags");
    if (d.contains("crimes")) in.crimes_path = existing(base, d["crimes"], "crimes");
    if (d.contains("lexicon")) in.lexicon_path = existing(base, d["lexicon"], "lexicon");
    if (d.contains("osm_tags")) in.osm_tags_path = existing(base, d["osm_tags"], "osm_tags");
    if (d.contains("crime_categories")) in.crime_categories = d["crime_categories"].get<std::vector<std::string>>();
    if (d.contains("assign_radius_m")) in.assign_radius_m = number<double>(d["assign_radius_m"], "assign_radius_m");
    c.inputs = std::move(in);
  }

  if (j.contains("database")) c.database_path = resolve(base, j["database"].get<std::string>());
  if (j.contains("profiles")) c.profiles_path = existing(base, j["profiles"], "profiles");
  if (j.contains("questionnaire")) c.questionnaire_path = existing(base, j["questionnaire"], "questionnaire");
  if (j.contains("query_points")) c.query_points_path = existing(base, j["query_points"], "query_points");

  if (j.contains("cost_mode")) {
    if (!j["cost_mode"].is_string()) throw FormatError("config: 'cost_mode' must be a string");
    try {
      c.cost_mode.kind = parse_cost_mode(j["cost_mode"].get<std::string>());
    } catch (const Error& e) {
      throw FormatError(std::string("config: ") + e.what());
    }
  }
  if (j.contains("gamma")) c.cost_mode.gamma = number<double>(j["gamma"], "gamma");
  if (j.contains("epsilon")) c.cost_mode.epsilon = number<double>(j["epsilon"], "epsilon");
  if (j.contains("chi")) c.round_trip.chi = number<double>(j["chi"], "chi");
  if (j.contains("overlap_penalty")) c.round_trip.overlap_penalty = number<double>(j["overlap_penalty"], "overlap_penalty");
  if (j.contains("start_snap_radius_m"))
    c.round_trip.start_snap_radius_m = number<double>(j["start_snap_radius_m"], "start_snap_radius_m");
  if (j.contains("intermediate_snap_radius_m"))
    c.round_trip.intermediate_snap_radius_m = number<double>(j["intermediate_snap_radius_m"], "intermediate_snap_radius_m");
  if (j.contains("k")) c.k_headings = number<int>(j["k"], "k");
  if (j.contains("tolerance")) c.length_tolerance = number<double>(j["tolerance"], "tolerance");
  if (!(c.cost_mode.gamma > 0) || !(c.cost_mode.epsilon > 0)) throw FormatError("config: gamma and epsilon must be positive");
  if (!(c.round_trip.chi > 0) || !(c.round_trip.overlap_penalty >= 1))
    throw FormatError("config: chi must be positive and overlap_penalty at least 1");
  if (c.k_headings < 1) throw FormatError("config: k must be at least 1");
  if (!(c.length_tolerance > 0 && c.length_tolerance < 1)) throw FormatError("config: tolerance must lie in (0, 1)");

  if (j.contains("analysis")) {
    const json& a = j["analysis"];
    reject_unknown(a, {"length_m", "min_count", "smoothing", "threads"}, "analysis");
    if (a.contains("length_m")) c.analysis_length_m = number<double>(a["length_m"], "length_m");
    if (a.contains("min_count")) c.min_count = number<int>(a["min_count"], "min_count");
    if (a.contains("smoothing")) c.smoothing = number<double>(a["smoothing"], "smoothing");
    if (a.contains("threads")) c.threads = number<unsigned>(a["threads"], "threads");
  }
  if (j.contains("host")) c.host = j["host"].get<std::string>();
  if (j.contains("port")) c.port = number<int>(j["port"], "port");
  return c;
}

ServiceConfig ServiceConfig::load(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError("config '" + path + "': " + e.what());
  }
  return from_json(j, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

Questionnaire Questionnaire::from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("short") || !doc["short"].is_array())
    throw FormatError("questionnaire needs a 'short' item array");
  for (const char* form : {"short", "long"}) {
    if (!doc.contains(form)) continue;
    for (const json& item : doc[form])
      for (const char* key : {"id", "aspect", "pre", "post"})
        if (!item.contains(key) || !item[key].is_string())
          throw FormatError(std::string("questionnaire item lacks string field '") + key + "'");
  }
  if (doc["short"].size() != 3) throw FormatError("the short questionnaire has exactly three items");
  Questionnaire q;
  q.doc_ = doc;
  return q;
}

Questionnaire Questionnaire::load(const std::string& path) { return from_json(json::parse(read_file(path))); }

Questionnaire Questionnaire::builtin() { return from_json(json::parse(kErsQuestionnaireJson)); }

json Questionnaire::items(ErsPhase phase, bool long_form) const {
  const char* form = long_form ? "long" : "short";
  json out = json::array();
  if (!doc_.contains(form)) return out;
  const char* key = phase == ErsPhase::pre ? "pre" : "post";
  for (const json& item : doc_[form]) out.push_back({{"id", item["id"]}, {"aspect", item["aspect"]}, {"text", item[key]}});
  return out;
}

std::optional<BoundingBox> parse_bbox(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto parts = split_csv_line(text);
  if (parts.size() != 4) throw ValidationError("bbox must be min_lon,min_lat,max_lon,max_lat");
  double v[4];
  for (int i = 0; i < 4; ++i) {
    try {
      std::size_t used = 0;
      v[i] = std::stod(trim(parts[static_cast<std::size_t>(i)]), &used);
    } catch (const std::exception&) {
      throw ValidationError("bbox values must be numbers");
    }
  }
  if (!(v[0] <= v[2]) || !(v[1] <= v[3])) throw ValidationError("bbox minimum exceeds maximum");
  return BoundingBox{v[0], v[1], v[2], v[3]};
}

AppService::AppService(std::shared_ptr<const ScoreStore> store, const BuiltinProfiles& profiles,
                       const ServiceConfig& config, Questionnaire questionnaire)
    : config_(config), data_(std::move(store)), questionnaire_(std::move(questionnaire)) {
  auto net = std::make_shared<const ScoredNetwork>(data_->graph, data_->components);
  engine_ = std::make_unique<RouteEngine>(net, profiles, config_.cost_mode, config_.round_trip);
  db_ = std::make_unique<Store>(config_.database_path);
  corpus_ = TagCorpus(data_->geotags);

  // Route ids depend on the data and on everything that shapes a route.
  json settings = {{"cost_mode", to_string(config_.cost_mode.kind)},
                   {"gamma", config_.cost_mode.gamma},
                   {"epsilon", config_.cost_mode.epsilon},
                   {"chi", config_.round_trip.chi},
                   {"overlap_penalty", config_.round_trip.overlap_penalty},
                   {"start_snap", config_.round_trip.start_snap_radius_m},
                   {"intermediate_snap", config_.round_trip.intermediate_snap_radius_m},
                   {"profiles", profiles_to_json(profiles)}};
  fingerprint_ = fnv1a_hex(encode_score_store(*data_) + settings.dump());
}

std::unique_ptr<AppService> AppService::from_config(const ServiceConfig& config) {
  auto store = std::make_shared<ScoreStore>(config.score_store_path ? load_score_store(*config.score_store_path)
                                                                     : ingest(*config.inputs));
  const BuiltinProfiles profiles =
      config.profiles_path ? profiles_from_json(json::parse(read_file(*config.profiles_path))) : builtin_profiles();
  Questionnaire q = config.questionnaire_path ? Questionnaire::load(*config.questionnaire_path) : Questionnaire::builtin();
  return std::make_unique<AppService>(std::move(store), profiles, config, std::move(q));
}

RouteRequest AppService::parse_route_request(const json& body) const {
  if (!body.is_object()) throw ValidationError("route request must be a JSON object");
  for (const auto& [k, _] : body.items())
    if (k != "lat" && k != "lon" && k != "length_m" && k != "profile" && k != "k" && k != "seed" && k != "tolerance")
      throw ValidationError("unknown route request field '" + k + "'");
  auto num = [&](const char* key) {
    if (!body[key].is_number()) throw ValidationError(std::string("'") + key + "' must be a number");
    return body[key].get<double>();
  };
  if (!body.contains("lat") || !body.contains("lon")) throw ValidationError("route request needs lat and lon");
  RouteRequest r;
  r.start = {num("lat"), num("lon")};
  r.k_headings = config_.k_headings;
  r.length_tolerance = config_.length_tolerance;
  if (body.contains("length_m")) r.target_length_m = num("length_m");
  if (body.contains("profile")) {
    if (!body["profile"].is_string()) throw ValidationError("'profile' must be a string");
    r.profile = body["profile"].get<std::string>();
  }
  if (body.contains("k")) {
    if (!body["k"].is_number_integer()) throw ValidationError("'k' must be an integer");
    r.k_headings = body["k"].get<int>();
  }
  if (body.contains("seed")) {
    if (!body["seed"].is_number_integer() || body["seed"].get<std::int64_t>() < 0)
      throw ValidationError("'seed' must be a non-negative integer");
    r.seed = body["seed"].get<std::uint64_t>();
  }
  if (body.contains("tolerance")) r.length_tolerance = num("tolerance");
  r.validate();
  engine_->router(r.profile);  // rejects unknown profiles
  return r;
}

json AppService::canonical_request(const RouteRequest& r) const {
  return {{"lat", r.start.lat},      {"lon", r.start.lon}, {"length_m", r.target_length_m}, {"profile", r.profile},
          {"k", r.k_headings},       {"seed", r.seed},     {"tolerance", r.length_tolerance}};
}

std::string AppService::route_id_for(const RouteRequest& r) const {
  return fnv1a_hex(fingerprint_ + canonical_request(r).dump());
}

HttpResponse AppService::post_route(const std::string& body) {
  return guarded([&] {
    const RouteRequest req = parse_route_request(json::parse(body));
    const std::string id = route_id_for(req);
    // Identical requests are answered from the store.
    if (auto hit = db_->get_route(id)) return json_response(200, hit->payload);
    const Route route = engine_->route(req);
    json payload = {{"route_id", id}, {"geojson", route_to_geojson(route)}, {"metrics", route_metrics(route)}};
    const StoredRoute stored = db_->put_route({id, canonical_request(req), payload, {}});
    return json_response(200, stored.payload);
  });
}

HttpResponse AppService::get_route(const std::string& route_id) const {
  return guarded([&] {
    const auto r = db_->get_route(route_id);
    if (!r) return error_response(404, "no route '" + route_id + "'");
    json out = r->payload;
    out["request"] = r->request;
    out["created_at"] = r->created_at;
    return json_response(200, out);
  });
}

HttpResponse AppService::questionnaire(const std::string& phase, const std::string& form) const {
  return guarded([&] {
    if (form != "short" && form != "long") throw ValidationError("form must be 'short' or 'long'");
    const ErsPhase p = parse_ers_phase(phase);
    const json& doc = questionnaire_.document();
    json out = {{"phase", phase}, {"form", form}, {"items", questionnaire_.items(p, form == "long")}};
    if (doc.contains("scale")) out["scale"] = doc["scale"];
    if (doc.contains("aspects")) out["aspects"] = doc["aspects"];
    return json_response(200, out);
  });
}

HttpResponse AppService::post_ers(const std::string& body) {
  return guarded([&] {
    json j = json::parse(body);
    if (j.is_object()) j.erase("id");
    ErsResponse r = ErsResponse::from_json(j);
    if (r.route_id && !db_->get_route(*r.route_id)) throw ValidationError("unknown route_id '" + *r.route_id + "'");
    const std::int64_t id = db_->put_ers(r);
    return json_response(201, db_->get_ers(id)->to_json());
  });
}

HttpResponse AppService::get_ers(const std::string& id_text) const {
  return guarded([&] {
    std::int64_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoll(id_text, &used);
      if (used != id_text.size()) throw std::invalid_argument(id_text);
    } catch (const std::exception&) {
      throw ValidationError("ERS id must be an integer");
    }
    const auto r = db_->get_ers(id);
    if (!r) return error_response(404, "no ERS response " + id_text);
    return json_response(200, r->to_json());
  });
}

HttpResponse AppService::list_ers(const std::optional<std::string>& route_id) const {
  return guarded([&] {
    json arr = json::array();
    for (const ErsResponse& r : db_->list_ers(route_id)) arr.push_back(r.to_json());
    return json_response(200, {{"count", arr.size()}, {"responses", arr}});
  });
}

HttpResponse AppService::importance() {
  std::call_once(importance_once_, [&] {
    importance_cache_ = guarded([&] {
      if (!config_.query_points_path) return error_response(404, "no query points configured for the analysis");
      std::ifstream in(*config_.query_points_path, std::ios::binary);
      const auto points = read_query_points_csv(in);
      BatchOptions opt;
      opt.target_length_m = config_.analysis_length_m;
      opt.k_headings = config_.k_headings;
      opt.length_tolerance = config_.length_tolerance;
      opt.threads = config_.threads;
      const BatchResult batch = coverage_batch(*engine_, points, opt);
      const ImportanceReport report =
          importance_report(std::span<const RoutePair>(batch.pairs), corpus_, config_.min_count, config_.smoothing);
      json out = report_to_json(report);
      out["pairs"] = batch.pairs.size();
      out["skipped"] = batch.skipped;
      return json_response(200, out);
    });
  });
  return importance_cache_;
}

HttpResponse AppService::segment_scores(const std::optional<std::string>& bbox, const std::string& profile) const {
  return guarded([&] {
    const Router& router = engine_->router(profile);
    return json_response(200, scores_to_geojson(engine_->network(), router.scores(), parse_bbox(bbox.value_or(""))));
  });
}

void AppService::serve() {
  httplib::Server server;
  auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
    res.set_header("Access-Control-Allow-Origin", "*");
  };
  auto param = [](const httplib::Request& req, const char* key) -> std::optional<std::string> {
    if (!req.has_param(key)) return std::nullopt;
    return req.get_param_value(key);
  };

  server.Post("/routes", [&](const httplib::Request& req, httplib::Response& res) { send(res, post_route(req.body)); });
  server.Get(R"(/routes/([0-9a-f]+))",
             [&](const httplib::Request& req, httplib::Response& res) { send(res, get_route(req.matches[1])); });
  server.Get("/ers/questionnaire", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, questionnaire(param(req, "phase").value_or(""), param(req, "form").value_or("short")));
  });
  server.Post("/ers", [&](const httplib::Request& req, httplib::Response& res) { send(res, post_ers(req.body)); });
  server.Get("/ers", [&](const httplib::Request& req, httplib::Response& res) { send(res, list_ers(param(req, "route_id"))); });
  server.Get(R"(/ers/(\d+))", [&](const httplib::Request& req, httplib::Response& res) { send(res, get_ers(req.matches[1])); });
  server.Get("/analysis/importance", [&](const httplib::Request&, httplib::Response& res) { send(res, importance()); });
  server.Get("/segments/scores", [&](const httplib::Request& req, httplib::Response& res) {
    send(res, segment_scores(param(req, "bbox"), param(req, "profile").value_or("scenic")));
  });
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  std::cerr << "runscape: listening on " << config_.host << ':' << config_.port << '\n';
  if (!server.listen(config_.host, config_.port))
    throw Error("cannot listen on " + config_.host + ":" + std::to_string(config_.port));
}

}  // namespace runscape
