#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <unistd.h>

#include "../support/fixtures.hpp"
#include "runscape/app_service.hpp"
#include "runscape/errors.hpp"
#include "runscape/text.hpp"

using namespace runscape;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static std::atomic<int> n{0};
    path = fs::temp_directory_path() / ("runscape_unit_" + std::to_string(getpid()) + "_" + std::to_string(n++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::shared_ptr<const ScoreStore> grid_store() {
  static const auto store = [] {
    const auto t = fixtures::textured_grid(14, {12, 12, 250.0, fixtures::kOrigin});
    return std::make_shared<const ScoreStore>(ingest_graph(t.graph, t.geotags, t.crimes));
  }();
  return store;
}

ServiceConfig config_in(const TempDir& dir) {
  ServiceConfig c;
  c.database_path = dir.file("service.db");
  return c;
}

std::string route_body(double length = 3000, std::uint64_t seed = 0, const std::string& profile = "scenic") {
  const LatLon p = fixtures::grid_point({12, 12, 250.0, fixtures::kOrigin}, 5.3, 6.1);
  return json{{"lat", p.lat}, {"lon", p.lon}, {"length_m", length}, {"profile", profile}, {"seed", seed}}.dump();
}

json body_of(const HttpResponse& r) { return json::parse(r.body); }

}  // namespace

TEST_CASE("POST /routes: valid request") {
  TempDir dir;
  AppService svc(grid_store(), builtin_profiles(), config_in(dir));
  const HttpResponse r = svc.post_route(route_body());
  REQUIRE(r.status == 200);
  const json j = body_of(r);
  CHECK(j["route_id"].get<std::string>().size() == 16);
  CHECK(j["geojson"]["type"] == "Feature");
  CHECK(j["geojson"]["geometry"]["type"] == "LineString");
  const json& m = j["metrics"];
  CHECK(m["length_m"].get<double>() >= 2400.0);
  CHECK(m["length_m"].get<double>() <= 3600.0);
  CHECK(m["profile"] == "scenic");
  CHECK(m["closed"] == true);
  CHECK(m["dimension_exposure"].size() == kDimensions);
  CHECK(m["mean_desirability"].get<double>() >= 0.0);
  CHECK(m["mean_desirability"].get<double>() <= 1.0);
}

TEST_CASE("POST /routes: validation") {
  TempDir dir;
  AppService svc(grid_store(), builtin_profiles(), config_in(dir));
  CHECK(svc.post_route(route_body(0)).status == 400);
  CHECK(svc.post_route(route_body(-5)).status == 400);
  CHECK(svc.post_route(route_body(3000, 0, "fastest")).status == 400);
  CHECK(svc.post_route("{not json").status == 400);
  CHECK(svc.post_route(R"({"lat": 51.5})").status == 400);
  json extra = json::parse(route_body());
  extra["colour"] = "blue";
  CHECK(svc.post_route(extra.dump()).status == 400);
  json far = json::parse(route_body());
  far["lat"] = 10.0;
  CHECK(svc.post_route(far.dump()).status == 422);
  // loops exist but none lands within 6 mm of the target
  json tight = json::parse(route_body(6000));
  tight["tolerance"] = 1e-6;
  const HttpResponse r = svc.post_route(tight.dump());
  CHECK(r.status == 422);
  CHECK(body_of(r).contains("error"));
  REQUIRE(body_of(r).contains("closest_length_m"));
  CHECK(std::abs(body_of(r)["closest_length_m"].get<double>() - 6000) > 0.006);
  // off the network entirely: no loop at all
  json huge = json::parse(route_body());
  huge["length_m"] = 200000;
  CHECK(svc.post_route(huge.dump()).status == 422);
}

TEST_CASE("POST /routes: identical requests give identical bytes; seeds matter") {
  TempDir dir;
  AppService svc(grid_store(), builtin_profiles(), config_in(dir));
  const HttpResponse a = svc.post_route(route_body(3000, 7));
  const HttpResponse b = svc.post_route(route_body(3000, 7));
  CHECK(a.body == b.body);
  CHECK(svc.store().route_count() == 1);
  const HttpResponse c = svc.post_route(route_body(3000, 8));
  CHECK(body_of(c)["route_id"] != body_of(a)["route_id"]);

  // a fresh service over the same data and a different database agrees
  TempDir other;
  AppService svc2(grid_store(), builtin_profiles(), config_in(other));
  CHECK(svc2.post_route(route_body(3000, 7)).body == a.body);

  // a different cost mode is a different dataset fingerprint
  ServiceConfig recip = config_in(other);
  recip.database_path = other.file("recip.db");
  recip.cost_mode = CostMode::paper_reciprocal();
  AppService svc3(grid_store(), builtin_profiles(), recip);
  CHECK(body_of(svc3.post_route(route_body(3000, 7)))["route_id"] != body_of(a)["route_id"]);
}

TEST_CASE("GET /routes/{id}") {
  TempDir dir;
  AppService svc(grid_store(), builtin_profiles(), config_in(dir));
  const json posted = body_of(svc.post_route(route_body()));
  const HttpResponse got = svc.get_route(posted["route_id"]);
  REQUIRE(got.status == 200);
  const json j = body_of(got);
  CHECK(j["geojson"] == posted["geojson"]);
  CHECK(j["metrics"] == posted["metrics"]);
  CHECK(j["request"]["length_m"] == 3000.0);
  CHECK(j["request"]["seed"] == 0);
  CHECK_FALSE(j["created_at"].get<std::string>().empty());
  CHECK(svc.get_route("0123456789abcdef").status == 404);
}

TEST_CASE("GET /ers/questionnaire") {
  TempDir dir;
  AppService svc(grid_store(), builtin_profiles(), config_in(dir));
  const HttpResponse pre = svc.questionnaire("pre");
  REQUIRE(pre.status == 200);
  const json items = body_of(pre)["items"];
  REQUIRE(items.size() == 3);
  CHECK(items[0]["id"] == "S1");
  CHECK(items[0]["aspect"] == "PA");
  CHECK(items[0]["text"] == "How confident are you to reach your goal?");
  CHECK(items[1]["text"] == "Are you happy with your environment right now?");
  CHECK(items[2]["text"] == "Do you feel connected to people?");
  const json post = body_of(svc.questionnaire("post"))["items"];
  CHECK(post[0]["text"] == "How easy was it to reach your goal?");
  CHECK(post[1]["text"] == "Was the route clean and beautiful?");
  CHECK(post[2]["text"] == "Do you feel connected to people?");
  const json long_pre = body_of(svc.questionnaire("pre", "long"))["items"];
  CHECK(long_pre.size() == 13);
  CHECK(long_pre[12]["text"] == "Does your mind feel clear?");
  CHECK(svc.questionnaire("during").status == 400);
  CHECK(svc.questionnaire("pre", "medium").status == 400);

  // the compiled-in asset is the shipped data file
  CHECK(Questionnaire::builtin().document() == json::parse(read_file(RUNSCAPE_DATA_DIR "/ers_questionnaire.json")));
}

TEST_CASE("ERS responses: round trip, validation, listing") {
  TempDir dir;
  AppService svc(grid_store(), builtin_profiles(), config_in(dir));
  const std::string rid = body_of(svc.post_route(route_body()))["route_id"];

  const HttpResponse created = svc.post_ers(json{{"route_id", rid}, {"phase", "pre"}, {"item_s1", 3}, {"item_s2", 4}, {"item_s3", 2}}.dump());
  REQUIRE(created.status == 201);
  const json stored = body_of(created);
  const HttpResponse fetched = svc.get_ers(std::to_string(stored["id"].get<std::int64_t>()));
  REQUIRE(fetched.status == 200);
  CHECK(body_of(fetched) == stored);
  CHECK(stored["phase"] == "pre");
  CHECK(stored["item_s1"] == 3);
  CHECK(stored["item_s2"] == 4);
  CHECK(stored["item_s3"] == 2);
  CHECK(stored["route_id"] == rid);

  CHECK(svc.post_ers(R"({"phase":"pre","item_s1":6,"item_s2":4,"item_s3":2})").status == 400);
  CHECK(svc.post_ers(R"({"phase":"pre","item_s1":0,"item_s2":4,"item_s3":2})").status == 400);
  CHECK(svc.post_ers(R"({"phase":"pre","item_s1":2.5,"item_s2":4,"item_s3":2})").status == 400);
  CHECK(svc.post_ers(R"({"phase":"mid","item_s1":2,"item_s2":4,"item_s3":2})").status == 400);
  CHECK(svc.post_ers(R"({"phase":"post","item_s1":2,"item_s2":4})").status == 400);
  CHECK(svc.post_ers(R"({"route_id":"ffffffffffffffff","phase":"post","item_s1":2,"item_s2":4,"item_s3":1})").status == 400);
  CHECK(svc.get_ers("999999").status == 404);
  CHECK(svc.get_ers("abc").status == 400);

  for (int i = 0; i < 99; ++i)
    REQUIRE(svc.post_ers(json{{"phase", i % 2 ? "post" : "pre"}, {"item_s1", 1 + i % 5}, {"item_s2", 1 + (i / 5) % 5}, {"item_s3", 5}}.dump())
                .status == 201);
  const json all = body_of(svc.list_ers(std::nullopt));
  REQUIRE(all["count"] == 100);
  std::int64_t prev = 0;
  for (const auto& r : all["responses"]) {
    CHECK(r["id"].get<std::int64_t>() > prev);
    prev = r["id"];
  }
  CHECK(body_of(svc.list_ers(std::nullopt)) == all);
  const json mine = body_of(svc.list_ers(rid));
  CHECK(mine["count"] == 1);
  CHECK(mine["responses"][0] == stored);
}

TEST_CASE("persistence survives a restart") {
  TempDir dir;
  std::string rid, route_body_text;
  json ers;
  {
    AppService svc(grid_store(), builtin_profiles(), config_in(dir));
    const HttpResponse r = svc.post_route(route_body(3500, 2));
    route_body_text = r.body;
    rid = body_of(r)["route_id"];
    ers = body_of(svc.post_ers(json{{"route_id", rid}, {"phase", "post"}, {"item_s1", 5}, {"item_s2", 1}, {"item_s3", 3}}.dump()));
  }
  AppService again(grid_store(), builtin_profiles(), config_in(dir));
  CHECK(again.store().route_count() == 1);
  const json got = body_of(again.get_route(rid));
  const json before = json::parse(route_body_text);
  CHECK(got["geojson"] == before["geojson"]);
  CHECK(got["metrics"] == before["metrics"]);
  CHECK(again.post_route(route_body(3500, 2)).body == route_body_text);
  CHECK(body_of(again.get_ers(std::to_string(ers["id"].get<std::int64_t>()))) == ers);
}

TEST_CASE("store: payloads round-trip losslessly") {
  TempDir dir;
  Store s(dir.file("raw.db"));
  const json payload = {{"x", 0.1 + 0.2}, {"tiny", 4.9e-324}, {"list", {1, 2, 3}}, {"text", "café \"quoted\""}};
  const StoredRoute put = s.put_route({"abc", {{"lat", 51.5}}, payload, {}});
  CHECK_FALSE(put.created_at.empty());
  const auto got = s.get_route("abc");
  REQUIRE(got);
  CHECK(got->payload == payload);
  CHECK(got->payload["x"].get<double>() == 0.1 + 0.2);
  // insert-or-ignore keeps the first row
  const StoredRoute again = s.put_route({"abc", {}, json{{"other", 1}}, {}});
  CHECK(again.payload == payload);
  CHECK(s.route_count() == 1);
  CHECK_FALSE(s.get_route("nope"));
  ErsResponse bad;
  bad.item_s1 = 7;
  CHECK_THROWS_AS(s.put_ers(bad), ValidationError);
}

TEST_CASE("concurrent requests agree and are stored once") {
  TempDir dir;
  AppService svc(grid_store(), builtin_profiles(), config_in(dir));
  std::vector<std::string> bodies(8);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&, i] {
      bodies[static_cast<std::size_t>(i)] = svc.post_route(route_body(3000, static_cast<std::uint64_t>(i % 2))).body;
      svc.post_ers(json{{"phase", "pre"}, {"item_s1", 1}, {"item_s2", 2}, {"item_s3", 3}}.dump());
    });
  for (auto& t : threads) t.join();
  for (int i = 2; i < 8; ++i) CHECK(bodies[static_cast<std::size_t>(i)] == bodies[static_cast<std::size_t>(i % 2)]);
  CHECK(svc.store().route_count() == 2);
  CHECK(body_of(svc.list_ers(std::nullopt))["count"] == 8);
}

TEST_CASE("segment scores and read-only endpoints") {
  TempDir dir;
  AppService svc(grid_store(), builtin_profiles(), config_in(dir));
  const std::string before = encode_score_store(*grid_store());
  const HttpResponse all = svc.segment_scores(std::nullopt, "scenic");
  REQUIRE(all.status == 200);
  CHECK(body_of(all)["features"].size() == grid_store()->graph.segments().size());
  const LatLon lo = fixtures::offset(fixtures::kOrigin, -1, -1), hi = fixtures::offset(fixtures::kOrigin, 300, 300);
  const std::string bbox = std::to_string(lo.lon) + "," + std::to_string(lo.lat) + "," + std::to_string(hi.lon) + "," +
                           std::to_string(hi.lat);
  const json some = body_of(svc.segment_scores(bbox, "urban"));
  CHECK(some["features"].size() > 0);
  CHECK(some["features"].size() < grid_store()->graph.segments().size());
  CHECK(some["features"][0]["properties"]["profile"] == "urban");
  CHECK(svc.segment_scores(std::string("1,2,3"), "scenic").status == 400);
  CHECK(svc.segment_scores(std::nullopt, "fastest").status == 400);
  svc.post_route(route_body());
  CHECK(svc.segment_scores(std::nullopt, "scenic").body == all.body);
  CHECK(encode_score_store(*grid_store()) == before);
  // no query points configured
  CHECK(svc.importance().status == 404);
}

TEST_CASE("importance endpoint over configured query points") {
  TempDir dir;
  const auto city = fixtures::corridor_city();
  auto store = std::make_shared<const ScoreStore>(ingest_graph(city.graph, city.geotags, {}));
  std::ofstream(dir.file("points.csv")) << "lat,lon,label\n"
                                       << format_double(city.starts[1].lat) << ',' << format_double(city.starts[1].lon)
                                       << ",a\n"
                                       << format_double(city.starts[6].lat) << ',' << format_double(city.starts[6].lon)
                                       << ",b\n";
  ServiceConfig c = config_in(dir);
  c.query_points_path = dir.file("points.csv");
  c.min_count = 5;
  c.threads = 1;
  AppService svc(store, builtin_profiles(), c);
  const HttpResponse r = svc.importance();
  REQUIRE(r.status == 200);
  const json j = body_of(r);
  CHECK(j["pairs"] == 2);
  CHECK(j["skipped"] == 0);
  CHECK(j["min_count"] == 5);
  CHECK(j["tags"].size() > 0);
  CHECK(svc.importance().body == r.body);
}

TEST_CASE("service config") {
  TempDir dir;
  std::ofstream(dir.file("store.bin"), std::ios::binary) << encode_score_store(*grid_store());
  const json ok = {{"score_store", "store.bin"}, {"database", "x.db"}, {"cost_mode", "paper_reciprocal"},
                   {"epsilon", 0.05}, {"k", 6}, {"tolerance", 0.1}, {"chi", 0.7}, {"overlap_penalty", 3.0},
                   {"analysis", {{"length_m", 4000}, {"min_count", 7}}}, {"port", 9999}};
  const ServiceConfig c = ServiceConfig::from_json(ok, dir.path.string());
  CHECK(c.score_store_path.value() == dir.file("store.bin"));
  CHECK(c.database_path == dir.file("x.db"));
  CHECK(c.cost_mode.kind == CostMode::Kind::paper_reciprocal);
  CHECK(c.cost_mode.epsilon == 0.05);
  CHECK(c.k_headings == 6);
  CHECK(c.length_tolerance == 0.1);
  CHECK(c.round_trip.chi == 0.7);
  CHECK(c.round_trip.overlap_penalty == 3.0);
  CHECK(c.analysis_length_m == 4000);
  CHECK(c.min_count == 7);
  CHECK(c.port == 9999);

  auto with = [&](const char* key, json v) {
    json j = ok;
    j[key] = std::move(v);
    return j;
  };
  CHECK_THROWS_AS(ServiceConfig::from_json(with("gama", 2.0), dir.path.string()), FormatError);
  CHECK_THROWS_AS(ServiceConfig::from_json(with("k", 0), dir.path.string()), FormatError);
  CHECK_THROWS_AS(ServiceConfig::from_json(with("cost_mode", "cheap"), dir.path.string()), FormatError);
  CHECK_THROWS_AS(ServiceConfig::from_json(with("score_store", "missing.bin"), dir.path.string()), Error);
  json both = with("datasets", {{"osm", "city.osm"}});
  CHECK_THROWS_AS(ServiceConfig::from_json(both, dir.path.string()), FormatError);
  json neither = ok;
  neither.erase("score_store");
  CHECK_THROWS_AS(ServiceConfig::from_json(neither, dir.path.string()), FormatError);

  // the shipped fixture config names files that exist
  const ServiceConfig fx = ServiceConfig::load(RUNSCAPE_FIXTURE_DIR "/config.json");
  REQUIRE(fx.inputs);
  CHECK(fs::exists(*fx.inputs->osm_path));
  CHECK(fs::exists(*fx.query_points_path));
}

TEST_CASE("bbox parsing") {
  CHECK_FALSE(parse_bbox("").has_value());
  const auto b = parse_bbox("-0.2,51.4,-0.1,51.6");
  REQUIRE(b);
  CHECK(b->min_lon == -0.2);
  CHECK(b->max_lat == 51.6);
  CHECK_THROWS_AS(parse_bbox("-0.1,51.4,-0.2,51.6"), ValidationError);
  CHECK_THROWS_AS(parse_bbox("a,b,c,d"), ValidationError);
}

TEST_CASE("score store: fixture ingest is deterministic and round-trips") {
  IngestInputs in;
  in.osm_path = RUNSCAPE_FIXTURE_DIR "/city.osm";
  in.geotags_path = RUNSCAPE_FIXTURE_DIR "/geotags.jsonl";
  in.crimes_path = RUNSCAPE_FIXTURE_DIR "/crimes.csv";
  const ScoreStore a = ingest(in);
  const std::string bytes = encode_score_store(a);
  CHECK(encode_score_store(ingest(in)) == bytes);
  CHECK(a.crime_warnings == 1);

  const ScoreStore back = decode_score_store(bytes);
  CHECK(encode_score_store(back) == bytes);
  CHECK(back.graph.segments().size() == a.graph.segments().size());
  CHECK(back.geotags.size() == a.geotags.size());
  CHECK(back.components.ids == a.components.ids);
  CHECK(back.components.raw == a.components.raw);
  CHECK(back.components.norm == a.components.norm);

  CHECK_THROWS_AS(decode_score_store(bytes + "x"), FormatError);
  CHECK_THROWS_AS(decode_score_store(bytes.substr(0, bytes.size() / 2)), FormatError);
  CHECK_THROWS_AS(decode_score_store("RSxx"), FormatError);
  std::string wrong_magic = bytes;
  wrong_magic[0] ^= 0x20;
  CHECK_THROWS_AS(decode_score_store(wrong_magic), FormatError);

  TempDir dir;
  save_score_store(a, dir.file("s.bin"));
  CHECK(read_file(dir.file("s.bin")) == bytes);
  CHECK(encode_score_store(load_score_store(dir.file("s.bin"))) == bytes);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}
