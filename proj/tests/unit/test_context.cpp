#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "runscape/errors.hpp"

using namespace runscape;
using fixtures::kOrigin;
using fixtures::offset;

namespace {

Segment seg(Surface surface, WayClass wc = WayClass::low_traffic, int sidewalks = 0, int signals = 0) {
  Segment s;
  s.id = 1;
  s.from_node = 1;
  s.to_node = 2;
  s.polyline = {kOrigin, offset(kOrigin, 0, 200)};
  s.length_m = 200;
  s.surface = surface;
  s.way_class = wc;
  s.sidewalk_count = sidewalks;
  s.signal_count = signals;
  return s;
}

}  // namespace

TEST_CASE("ground indicators") {
  CHECK(ground_indicator(seg(Surface::grass), Surface::grass) == 1);
  CHECK(ground_indicator(seg(Surface::grass), Surface::sand) == 0);
  for (Surface t : kKnownSurfaces) CHECK(ground_indicator(seg(Surface::unknown), t) == 0);
  for (Surface s : kKnownSurfaces) {
    int ones = 0;
    for (Surface t : kKnownSurfaces) ones += ground_indicator(seg(s), t);
    CHECK(ones == 1);
  }
}

TEST_CASE("obstacles: inverse signal count") {
  CHECK(obstacle_score(seg(Surface::pavement, WayClass::low_traffic, 0, 0)) == 1.0);
  CHECK(obstacle_score(seg(Surface::pavement, WayClass::low_traffic, 0, 3)) == 0.25);
  double prev = 2.0;
  for (int n = 0; n <= 20; ++n) {
    const double v = obstacle_from(n);
    CHECK(v <= prev);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("traffic tiers") {
  CHECK(traffic_score(seg(Surface::pavement, WayClass::low_traffic)) == 1.0);
  CHECK(traffic_score(seg(Surface::pavement, WayClass::high_traffic, 2)) == 0.5);
  CHECK_THROWS_AS(traffic_score(seg(Surface::pavement, WayClass::extreme_traffic, 2)), ContractError);
  CHECK_THROWS_AS(traffic_score(seg(Surface::pavement, WayClass::high_traffic, 0)), ContractError);
  CHECK(traffic_score(seg(Surface::pavement, WayClass::high_traffic, 1), {1.0, 0.3}) == 0.3);
}

TEST_CASE("ingest_crimes: category filter") {
  const std::vector<CrimeRecord> violent = {{kOrigin, "Violence and sexual offences", "2018-03"}};
  CHECK(ingest_crimes(violent).size() == 1);
  const std::vector<CrimeRecord> burglary = {{kOrigin, "Burglary", "2018-03"}};
  CHECK(ingest_crimes(burglary).size() == 0);
  CHECK(ingest_crimes(burglary, {"burglary"}).size() == 1);
  const std::vector<CrimeRecord> bad = {{{91.0, 0.0}, "Robbery", "2018-03"}};
  const auto idx = ingest_crimes(bad);
  CHECK(idx.size() == 0);
  CHECK(idx.skipped == 1);
}

TEST_CASE("ingest_crimes: 500 records match an independent filter and count") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 3000);
  const std::vector<std::string> cats = {"Violence and sexual offences", "Robbery", "Burglary", "Anti-social behaviour",
                                         "Violent crime", "Vehicle crime", "robbery"};
  std::uniform_int_distribution<std::size_t> pick(0, cats.size() - 1);
  std::vector<CrimeRecord> recs;
  int expect = 0;
  for (int i = 0; i < 500; ++i) {
    const std::string& c = cats[pick(rng)];
    recs.push_back({offset(kOrigin, u(rng), u(rng)), c, "2018-01"});
    expect += c == "Violence and sexual offences" || c == "Robbery" || c == "robbery" || c == "Violent crime";
  }
  CHECK(static_cast<int>(ingest_crimes(recs).size()) == expect);
}

TEST_CASE("read_crimes_csv: police export shape") {
  std::istringstream in(
      "Crime ID,Month,Reported by,Falls within,Longitude,Latitude,Location,LSOA code,LSOA name,Crime type\n"
      "a,2018-01,Met,Met,-0.12,51.5,On or near,E1,X,Robbery\n"
      "b,2018-01,Met,Met,,,No location,E1,X,Robbery\n"
      "c,2018-02,Met,Met,-0.121,51.501,On or near,E1,X,Burglary\n");
  const CrimeCsv csv = read_crimes_csv(in);
  REQUIRE(csv.records.size() == 2);
  CHECK(csv.malformed == 1);
  CHECK(csv.records[0].category == "Robbery");
  CHECK(csv.records[0].month == "2018-01");
  CHECK(csv.records[1].pos.lat == 51.501);

  std::ifstream f(RUNSCAPE_FIXTURE_DIR "/crimes.csv");
  const CrimeCsv fixture = read_crimes_csv(f);
  CHECK(fixture.records.size() == 400);
  CHECK(fixture.malformed == 1);

  std::istringstream missing("Month,Longitude,Latitude\n2018-01,0,51\n");
  CHECK_THROWS_AS(read_crimes_csv(missing), FormatError);
}

TEST_CASE("safety: inverse count in the 200 m buffer") {
  const Segment s = seg(Surface::pavement);
  CHECK(safety_score(s, ingest_crimes({})) == 1.0);
  const std::vector<CrimeRecord> three = {{offset(kOrigin, 150, 100), "Robbery", ""},
                                          {offset(kOrigin, -199, 50), "Robbery", ""},
                                          {offset(kOrigin, 0, 390), "Robbery", ""},
                                          {offset(kOrigin, 0, 410), "Robbery", ""},
                                          {offset(kOrigin, 250, 100), "Robbery", ""}};
  CHECK(safety_score(s, ingest_crimes(three)) == 0.25);
  double prev = 2.0;
  for (int n = 0; n <= 50; ++n) {
    CHECK(safety_from(n) <= prev);
    CHECK(safety_from(n) > 0.0);
    prev = safety_from(n);
  }
}

TEST_CASE("safety: buffer membership matches exhaustive point-to-polyline scan") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-400, 1400);
  const std::vector<LatLon> line = {offset(kOrigin, 0, 0), offset(kOrigin, 300, 200), offset(kOrigin, 350, 700),
                                    offset(kOrigin, 900, 900)};
  std::vector<CrimeRecord> recs;
  for (int i = 0; i < 1000; ++i) recs.push_back({offset(kOrigin, u(rng), u(rng)), "Robbery", "2018-05"});
  int expect = 0;
  for (const auto& r : recs) expect += oracles::cross_track_distance_m(r.pos, line) <= kCrimeBufferM;
  const auto idx = ingest_crimes(recs);
  CHECK(idx.count_within(line, kCrimeBufferM) == expect);

  // reindexing the records keeps the same members
  std::shuffle(recs.begin(), recs.end(), rng);
  CHECK(ingest_crimes(recs).count_within(line, kCrimeBufferM) == expect);
}
