// runscape command-line front end: ingest, score, route, batch, serve.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "runscape/app_service.hpp"
#include "runscape/errors.hpp"
#include "runscape/text.hpp"

using namespace runscape;
using nlohmann::json;

namespace {

// Options shared by every command that routes or scores.
struct NetworkOpts {
  std::string config;
  std::string store;
  std::string profiles;
  std::string cost_mode;
  std::optional<double> gamma, epsilon, chi, overlap_penalty, tolerance;
  std::optional<int> k;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config, "Service config JSON (datasets, cost mode, defaults)");
    cmd->add_option("--store", store, "Binary score store written by 'ingest'");
    cmd->add_option("--profiles", profiles, "Profile coefficient JSON overriding the builtin profiles");
    cmd->add_option("--cost-mode", cost_mode, "detour_bounded or paper_reciprocal");
    cmd->add_option("--gamma", gamma, "Detour bound for detour_bounded costs");
    cmd->add_option("--epsilon", epsilon, "Floor on desirability for paper_reciprocal costs");
    cmd->add_option("--chi", chi, "Crow-fly share of half the target length");
    cmd->add_option("--overlap-penalty", overlap_penalty, "Cost multiplier on outbound segments for the return leg");
    cmd->add_option("-k,--k", k, "Number of sampled headings");
    cmd->add_option("--tolerance", tolerance, "Accepted relative deviation from the target length");
  }

  ServiceConfig config_or_defaults() const {
    ServiceConfig c;
    if (!config.empty()) {
      c = ServiceConfig::load(config);
    } else if (store.empty()) {
      throw ValidationError("pass --store or --config");
    }
    if (!store.empty()) {
      c.score_store_path = store;
      c.inputs.reset();
    }
    if (!profiles.empty()) c.profiles_path = profiles;
    if (!cost_mode.empty()) c.cost_mode.kind = parse_cost_mode(cost_mode);
    if (gamma) c.cost_mode.gamma = *gamma;
    if (epsilon) c.cost_mode.epsilon = *epsilon;
    if (chi) c.round_trip.chi = *chi;
    if (overlap_penalty) c.round_trip.overlap_penalty = *overlap_penalty;
    if (k) c.k_headings = *k;
    if (tolerance) c.length_tolerance = *tolerance;
    return c;
  }

  std::shared_ptr<const ScoreStore> load_data(const ServiceConfig& c) const {
    return std::make_shared<ScoreStore>(c.score_store_path ? load_score_store(*c.score_store_path) : ingest(*c.inputs));
  }

  BuiltinProfiles load_profiles(const ServiceConfig& c) const {
    return c.profiles_path ? profiles_from_json(json::parse(read_file(*c.profiles_path))) : builtin_profiles();
  }

  RouteEngine engine(const ServiceConfig& c) const {
    const auto data = load_data(c);
    auto net = std::make_shared<const ScoredNetwork>(data->graph, data->components);
    return RouteEngine(net, load_profiles(c), c.cost_mode, c.round_trip);
  }
};

LatLon parse_latlon(const std::string& s) {
  const auto parts = split_csv_line(s);
  if (parts.size() != 2) throw ValidationError("--start expects lat,lon");
  try {
    return {std::stod(parts[0]), std::stod(parts[1])};
  } catch (const std::exception&) {
    throw ValidationError("--start expects numeric lat,lon");
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    write_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenic and urban running routes over scored street networks"};
  app.require_subcommand(1);

  // ingest
  IngestInputs in;
  std::string osm, segments, geotags, crimes, lexicon, osm_tags, store_out;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a binary score store from raw datasets");
  auto* osm_opt = ingest_cmd->add_option("--osm", osm, "OSM XML extract")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--segments", segments, "Segment GeoJSON (alternative to --osm)")
      ->check(CLI::ExistingFile)
      ->excludes(osm_opt);
  ingest_cmd->add_option("--geotags", geotags, "Geotagged records, .jsonl or .csv")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--crimes", crimes, "Crime CSV (Month, Longitude, Latitude, Crime type)")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--lexicon", lexicon, "Lexicon JSON")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--osm-tags", osm_tags, "Highway/surface tag table JSON")->check(CLI::ExistingFile);
  ingest_cmd->add_option("--crime-category", in.crime_categories, "Person-crime category (repeatable)");
  ingest_cmd->add_option("--assign-radius", in.assign_radius_m, "Max snap distance for geotags in meters");
  ingest_cmd->add_option("-o,--out", store_out, "Output score store")->required();

  // score
  NetworkOpts score_net;
  std::string score_profile = "scenic", bbox, score_out;
  auto* score_cmd = app.add_subcommand("score", "Write a GeoJSON score layer");
  score_net.add(score_cmd);
  score_cmd->add_option("--profile", score_profile, "scenic or urban");
  score_cmd->add_option("--bbox", bbox, "min_lon,min_lat,max_lon,max_lat");
  score_cmd->add_option("-o,--out", score_out, "Output GeoJSON (stdout when omitted)");

  // route
  NetworkOpts route_net;
  std::string start, route_profile = "scenic", route_out;
  double length_m = 5000.0;
  std::uint64_t seed = 0;
  auto* route_cmd = app.add_subcommand("route", "Generate one round-trip route");
  route_net.add(route_cmd);
  route_cmd->add_option("--start", start, "Start as lat,lon")->required();
  route_cmd->add_option("--length", length_m, "Target length in meters");
  route_cmd->add_option("--profile", route_profile, "scenic or urban");
  route_cmd->add_option("--seed", seed, "Heading rotation seed");
  route_cmd->add_option("-o,--out", route_out, "Output GeoJSON (stdout when omitted)");

  // batch
  NetworkOpts batch_net;
  std::string points, pairs_out = "pairs.geojson", importance_out = "importance.csv";
  double batch_length = 5000.0, smoothing = kDefaultTagSmoothing;
  std::optional<int> min_count;
  std::uint64_t batch_seed = 0;
  unsigned threads = 0;
  auto* batch_cmd = app.add_subcommand("batch", "Scenic/urban coverage batch and tag importance");
  batch_net.add(batch_cmd);
  batch_cmd->add_option("--points", points, "Query-point CSV (lat, lon, label)")->required()->check(CLI::ExistingFile);
  batch_cmd->add_option("--length", batch_length, "Target length in meters");
  batch_cmd->add_option("--seed", batch_seed, "Heading rotation seed");
  batch_cmd->add_option("--min-count", min_count, "Tags must occur more often than this");
  batch_cmd->add_option("--smoothing", smoothing, "Pseudo-occurrences added to both classes");
  batch_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  batch_cmd->add_option("--pairs-out", pairs_out, "Route pairs GeoJSON");
  batch_cmd->add_option("--importance-out", importance_out, "Importance table, .csv or .json");

  // serve
  std::string serve_config, host;
  std::optional<int> port;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--config", serve_config, "Service config JSON")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--port", port, "Port");

  // profiles
  std::string profiles_out;
  auto* profiles_cmd = app.add_subcommand("profiles", "Print the builtin profile coefficients as JSON");
  profiles_cmd->add_option("-o,--out", profiles_out, "Output JSON (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest_cmd) {
      if (!osm.empty()) in.osm_path = osm;
      if (!segments.empty()) in.segments_geojson_path = segments;
      if (!geotags.empty()) in.geotags_path = geotags;
      if (!crimes.empty()) in.crimes_path = crimes;
      if (!lexicon.empty()) in.lexicon_path = lexicon;
      if (!osm_tags.empty()) in.osm_tags_path = osm_tags;
      const ScoreStore s = ingest(in);
      save_score_store(s, store_out);
      std::cerr << "ingest: " << s.graph.segments().size() << " segments, " << s.geotags.size() << " geotags ("
                << s.geotag_warnings << " unassigned or invalid), " << s.crime_warnings << " crime rows skipped\n";
    } else if (*score_cmd) {
      const ServiceConfig c = score_net.config_or_defaults();
      const RouteEngine engine = score_net.engine(c);
      const json layer = scores_to_geojson(engine.network(), engine.router(score_profile).scores(), parse_bbox(bbox));
      write_output(score_out, layer.dump() + "\n");
    } else if (*route_cmd) {
      const ServiceConfig c = route_net.config_or_defaults();
      const RouteEngine engine = route_net.engine(c);
      RouteRequest req;
      req.start = parse_latlon(start);
      req.target_length_m = length_m;
      req.profile = route_profile;
      req.k_headings = c.k_headings;
      req.length_tolerance = c.length_tolerance;
      req.seed = seed;
      const Route r = engine.route(req);
      write_output(route_out, route_to_geojson(r).dump() + "\n");
      std::cerr << "route: " << r.profile << ' ' << r.length_m << " m, mean desirability " << r.mean_desirability << '\n';
    } else if (*batch_cmd) {
      const ServiceConfig c = batch_net.config_or_defaults();
      const auto data = batch_net.load_data(c);
      auto net = std::make_shared<const ScoredNetwork>(data->graph, data->components);
      const RouteEngine engine(net, batch_net.load_profiles(c), c.cost_mode, c.round_trip);
      std::ifstream pin(points, std::ios::binary);
      const auto qp = read_query_points_csv(pin);
      BatchOptions opt;
      opt.target_length_m = batch_length;
      opt.k_headings = c.k_headings;
      opt.length_tolerance = c.length_tolerance;
      opt.seed = batch_seed;
      opt.threads = threads;
      const BatchResult batch = coverage_batch(engine, qp, opt);
      for (const auto& f : batch.failures) std::cerr << "batch: skipped " << f << '\n';
      const TagCorpus corpus(data->geotags);
      const ImportanceReport report = importance_report(std::span<const RoutePair>(batch.pairs), corpus,
                                                        min_count.value_or(c.min_count), smoothing);
      write_file(pairs_out, pairs_to_geojson(batch.pairs).dump() + "\n");
      const bool as_json = importance_out.size() >= 5 && importance_out.substr(importance_out.size() - 5) == ".json";
      write_file(importance_out, as_json ? report_to_json(report).dump(2) + "\n" : report_to_csv(report));
      std::cerr << "batch: " << batch.pairs.size() << " pairs, " << batch.skipped << " skipped, "
                << report.entries.size() << " tags above the count threshold\n";
    } else if (*profiles_cmd) {
      write_output(profiles_out, profiles_to_json(builtin_profiles()).dump(2) + "\n");
    } else if (*serve_cmd) {
      ServiceConfig c = ServiceConfig::load(serve_config);
      if (!host.empty()) c.host = host;
      if (port) c.port = *port;
      AppService::from_config(c)->serve();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
