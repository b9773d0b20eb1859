#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <memory>

#include "runscape/app_service.hpp"
#include "runscape/errors.hpp"
#include "runscape/route_analysis.hpp"
#include "runscape/route_engine.hpp"
#include "runscape/score_store.hpp"
#include "runscape/text.hpp"

namespace py = pybind11;
using namespace runscape;

namespace {

// Everything crosses the boundary as JSON text; the Python side decodes it.
struct Engine {
  std::shared_ptr<const ScoreStore> data;
  std::shared_ptr<const ScoredNetwork> net;
  std::unique_ptr<RouteEngine> engine;
  ServiceConfig defaults;
};

CostMode cost_mode(const std::string& kind, double gamma, double epsilon) {
  CostMode m;
  m.kind = parse_cost_mode(kind);
  m.gamma = gamma;
  m.epsilon = epsilon;
  return m;
}

std::unique_ptr<Engine> make_engine(std::shared_ptr<const ScoreStore> store, const std::string& kind, double gamma,
                                    double epsilon, const std::optional<std::string>& profiles_path) {
  auto e = std::make_unique<Engine>();
  e->data = std::move(store);
  e->net = std::make_shared<const ScoredNetwork>(e->data->graph, e->data->components);
  const BuiltinProfiles profiles =
      profiles_path ? profiles_from_json(nlohmann::json::parse(read_file(*profiles_path))) : builtin_profiles();
  e->engine = std::make_unique<RouteEngine>(e->net, profiles, cost_mode(kind, gamma, epsilon), e->defaults.round_trip);
  return e;
}

nlohmann::json metrics(const Route& r) {
  return {{"length_m", r.length_m},
          {"mean_desirability", r.mean_desirability},
          {"total_cost", r.total_cost},
          {"profile", r.profile},
          {"heading_index", r.heading_index},
          {"dimension_exposure", dimension_exposure_json(r.dimension_exposure)}};
}

py::tuple response(const HttpResponse& r) { return py::make_tuple(r.status, r.body); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<NoSnapError>(m, "NoSnapError", base.ptr());
  py::register_exception<NoPathError>(m, "NoPathError", base.ptr());
  py::register_exception<BatchError>(m, "BatchError", base.ptr());
  py::register_exception<UnknownKeyError>(m, "UnknownKeyError", base.ptr());
  // carries closest_length_m, so it needs its own translator
  static PyObject* no_route = nullptr;
  no_route = PyErr_NewException("runscape._core.NoRouteError", base.ptr(), nullptr);
  m.add_object("NoRouteError", py::handle(no_route));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const NoRouteError& e) {
      py::object exc = py::reinterpret_borrow<py::object>(no_route)(e.what());
      exc.attr("closest_length_m") = e.closest_length_m() >= 0 ? py::cast(e.closest_length_m()) : py::none();
      PyErr_SetObject(no_route, exc.ptr());
    }
  });

  py::class_<ScoreStore, std::shared_ptr<ScoreStore>>(m, "ScoreStore")
      .def_property_readonly("segment_count", [](const ScoreStore& s) { return s.graph.segments().size(); })
      .def_property_readonly("node_count", [](const ScoreStore& s) { return s.graph.nodes().size(); })
      .def_property_readonly("geotag_count", [](const ScoreStore& s) { return s.geotags.size(); })
      .def("to_bytes", [](const ScoreStore& s) { return py::bytes(encode_score_store(s)); })
      .def("save", [](const ScoreStore& s, const std::string& path) { save_score_store(s, path); }, py::arg("path"));

  m.def(
      "ingest",
      [](std::optional<std::string> osm, std::optional<std::string> segments, std::optional<std::string> geotags,
         std::optional<std::string> crimes, std::optional<std::string> lexicon, double assign_radius_m) {
        IngestInputs in;
        in.osm_path = std::move(osm);
        in.segments_geojson_path = std::move(segments);
        in.geotags_path = std::move(geotags);
        in.crimes_path = std::move(crimes);
        in.lexicon_path = std::move(lexicon);
        in.assign_radius_m = assign_radius_m;
        py::gil_scoped_release nogil;
        return std::make_shared<ScoreStore>(ingest(in));
      },
      py::kw_only(), py::arg("osm") = py::none(), py::arg("segments") = py::none(), py::arg("geotags") = py::none(),
      py::arg("crimes") = py::none(), py::arg("lexicon") = py::none(), py::arg("assign_radius_m") = kDefaultAssignRadiusM);
  m.def("load_store", [](const std::string& path) { return std::make_shared<ScoreStore>(load_score_store(path)); });
  m.def("store_from_bytes", [](const py::bytes& b) { return std::make_shared<ScoreStore>(decode_score_store(std::string(b))); });

  py::class_<Engine>(m, "Engine")
      .def(py::init([](std::shared_ptr<ScoreStore> store, const std::string& kind, double gamma, double epsilon,
                       std::optional<std::string> profiles) {
             return make_engine(std::move(store), kind, gamma, epsilon, profiles);
           }),
           py::arg("store"), py::kw_only(), py::arg("cost_mode") = "detour_bounded", py::arg("gamma") = 2.0,
           py::arg("epsilon") = 0.01, py::arg("profiles") = py::none())
      .def(
          "route",
          [](const Engine& e, double lat, double lon, double length_m, const std::string& profile, std::uint64_t seed,
             int k, double tolerance) {
            RouteRequest req;
            req.start = {lat, lon};
            req.target_length_m = length_m;
            req.profile = profile;
            req.seed = seed;
            req.k_headings = k;
            req.length_tolerance = tolerance;
            req.validate();
            Route r;
            {
              py::gil_scoped_release nogil;
              r = e.engine->route(req);
            }
            return nlohmann::json{{"geojson", route_to_geojson(r)}, {"metrics", metrics(r)}}.dump();
          },
          py::arg("lat"), py::arg("lon"), py::kw_only(), py::arg("length_m") = 5000.0, py::arg("profile") = "scenic",
          py::arg("seed") = 0, py::arg("k") = 8, py::arg("tolerance") = 0.2)
      .def(
          "scores",
          [](const Engine& e, const std::string& profile, const std::optional<std::string>& bbox) {
            const auto& router = e.engine->router(profile);
            return scores_to_geojson(*e.net, router.scores(), bbox ? parse_bbox(*bbox) : std::nullopt).dump();
          },
          py::arg("profile") = "scenic", py::arg("bbox") = py::none())
      .def(
          "batch",
          [](const Engine& e, const std::string& points_csv, double length_m, int min_count, double smoothing,
             unsigned threads, std::uint64_t seed) {
            std::ifstream in(points_csv);
            if (!in) throw Error("cannot open " + points_csv);
            const auto points = read_query_points_csv(in);
            BatchOptions opt;
            opt.target_length_m = length_m;
            opt.threads = threads;
            opt.seed = seed;
            nlohmann::json out;
            {
              py::gil_scoped_release nogil;
              const BatchResult res = coverage_batch(*e.engine, points, opt);
              const ImportanceReport rep = importance_report(res.pairs, TagCorpus(e.data->geotags), min_count, smoothing);
              out = {{"pairs", pairs_to_geojson(res.pairs)},
                     {"skipped", res.skipped},
                     {"failures", res.failures},
                     {"importance", report_to_json(rep)}};
            }
            return out.dump();
          },
          py::arg("points_csv"), py::kw_only(), py::arg("length_m") = 5000.0,
          py::arg("min_count") = kDefaultMinTagCount, py::arg("smoothing") = kDefaultTagSmoothing,
          py::arg("threads") = 0, py::arg("seed") = 0);

  py::class_<AppService>(m, "Service")
      .def_static(
          "from_config",
          [](const std::string& path) { return AppService::from_config(ServiceConfig::load(path)); }, py::arg("path"))
      .def("post_route", [](AppService& s, const std::string& body) { return response(s.post_route(body)); })
      .def("get_route", [](const AppService& s, const std::string& id) { return response(s.get_route(id)); })
      .def(
          "questionnaire",
          [](const AppService& s, const std::string& phase, const std::string& form) {
            return response(s.questionnaire(phase, form));
          },
          py::arg("phase"), py::arg("form") = "short")
      .def("post_ers", [](AppService& s, const std::string& body) { return response(s.post_ers(body)); })
      .def("get_ers", [](const AppService& s, const std::string& id) { return response(s.get_ers(id)); })
      .def(
          "list_ers", [](const AppService& s, std::optional<std::string> rid) { return response(s.list_ers(rid)); },
          py::arg("route_id") = py::none())
      .def("importance",
           [](AppService& s) {
             HttpResponse r;
             {
               py::gil_scoped_release nogil;
               r = s.importance();
             }
             return response(r);
           })
      .def(
          "segment_scores",
          [](const AppService& s, std::optional<std::string> bbox, const std::string& profile) {
            return response(s.segment_scores(bbox, profile));
          },
          py::arg("bbox") = py::none(), py::arg("profile") = "scenic");
}
