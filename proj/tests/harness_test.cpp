#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "offload/errors.hpp"
#include "offload/harness.hpp"
#include "offload/json_io.hpp"
#include "offload/topologies.hpp"

using namespace offload;
using harness::json;

namespace {

namespace fs = std::filesystem;

json solo_network() {
  return json::parse(R"({"inline": {"servers": [{"id": 0, "cpu_freq_ghz": 2, "tx_power_dbm": 30,
                                                 "gamma": 1e-28}], "links": []}})");
}

harness::Scenario base(json network, std::vector<std::string> methods) {
  json j;
  j["id"] = "t";
  j["network"] = std::move(network);
  j["methods"] = std::move(methods);
  j["repetitions"] = 0;
  return harness::parse_scenario(j);
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

fs::path temp_dir() {
  const fs::path d = fs::temp_directory_path() / "offload_harness_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("scenario validation lists every offending field") {
  const json j = json::parse(R"({
    "network": {"topology": "mixed", "file": "x.json"},
    "task_size_gbit": -1,
    "weights": {"w1": 0, "w2": 0},
    "methods": ["cmo", "bogus", "np+pmo"],
    "sweep": {"parameter": "nope", "values": [1]}
  })");
  try {
    harness::parse_scenario(j);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    for (const char* field : {"network", "task_size_gbit", "weights", "bogus", "params.np", "sweep"}) {
      CHECK_MESSAGE(msg.find(field) != std::string::npos, field);
    }
  }
  CHECK_THROWS_AS(harness::parse_scenario(json::parse(R"({"methods": ["cmo"]})")), ValidationError);
}

TEST_CASE("scenario json round trip") {
  const harness::Scenario s = harness::load_scenario("scenarios/compare_small.json");
  const harness::Scenario back = harness::parse_scenario(harness::to_json(s), s.base_dir);
  CHECK(harness::to_json(back) == harness::to_json(s));
  CHECK(back.methods == s.methods);
  CHECK(back.ga.population == s.ga.population);
}

TEST_CASE("local on a solo master") {
  const harness::Scenario s = base(solo_network(), {"local"});
  const auto records = harness::run_scenario(s);
  REQUIRE(records.size() == 1);
  const double y = 1e9, f = 2e9, b = units::kDefaultCyclesPerBit;
  CHECK(records[0].cost == doctest::Approx(y * b / f).epsilon(1e-12));
  CHECK(records[0].allocation == std::vector<double>{y});
  CHECK(records[0].t_exe == 0.0);
}

TEST_CASE("cmo and pmo agree on a two-subtree tree") {
  harness::Scenario s =
      base(json::parse(R"({"topology": "two_subtree_asymmetric", "seed": 3})"), {"cmo", "pmo"});
  const auto r = harness::run_scenario(s);
  REQUIRE(r.size() == 2);
  CHECK(r[0].cost == doctest::Approx(r[1].cost).epsilon(1e-7));
}

TEST_CASE("task size sweep scales linearly") {
  json j = json::parse(R"({"network": {"topology": "mixed", "seed": 2}, "methods": ["pmo"],
                          "weights": {"w1": 0.5, "w2": 0.05}, "repetitions": 0,
                          "sweep": {"parameter": "task_size_gbit", "values": [1, 2, 4]}})");
  const auto r = harness::run_scenario(harness::parse_scenario(j));
  REQUIRE(r.size() == 3);
  CHECK(r[1].cost == doctest::Approx(2 * r[0].cost).epsilon(1e-9));
  CHECK(r[2].cost == doctest::Approx(4 * r[0].cost).epsilon(1e-9));
  for (std::size_t i = 0; i < r[0].allocation.size(); ++i) {
    CHECK(r[2].allocation[i] == doctest::Approx(4 * r[0].allocation[i]).epsilon(1e-9).scale(1e9));
  }
  CHECK(r[1].sweep_param == "task_size_gbit");
  CHECK(*r[1].sweep_value == 2.0);
}

TEST_CASE("subtree count sweep") {
  const harness::Scenario s = harness::load_scenario("scenarios/sweep_subtrees.json");
  const SinkTree t3 = build_sink_tree(topologies::subtree_family(3, 5));
  CHECK(t3.subtrees().size() == 3);
  harness::Scenario small = s;
  small.repetitions = 0;
  small.sweep->values = {1, 2, 3};
  const auto r = harness::run_scenario(small);
  REQUIRE(r.size() == 6);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(r[2 * k].cost == doctest::Approx(r[2 * k + 1].cost).epsilon(1e-7));
  }
}

TEST_CASE("link rate sweep sets both directions") {
  json j = json::parse(R"({"network": {"topology": "characteristics"}, "methods": ["pmo"],
                          "weights": {"w1": 0.5, "w2": 0.05}, "repetitions": 0,
                          "sweep": {"parameter": "link_rate_gbps", "link": [0, 1],
                                    "values": [0.3, 10]}})");
  const auto r = harness::run_scenario(harness::parse_scenario(j));
  REQUIRE(r.size() == 2);
  const double low = r[0].allocation[1] + r[0].allocation[3];
  const double high = r[1].allocation[1] + r[1].allocation[3];
  CHECK(low == 0.0);
  CHECK(high > 0.0);
}

TEST_CASE("emitters") {
  std::ostringstream empty;
  harness::emit_csv({}, empty);
  CHECK(count_lines(empty.str()) == 1);
  CHECK(empty.str().rfind("scenario_id,method,", 0) == 0);

  const harness::Scenario s = harness::load_scenario("scenarios/compare_small.json");
  harness::Scenario quick = s;
  quick.repetitions = 0;
  quick.methods = {"cmo", "pmo", "local", "multi_hop"};
  const auto records = harness::run_scenario(quick);

  std::ostringstream csv;
  harness::emit_csv(records, csv);
  CHECK(count_lines(csv.str()) == records.size() + 1);

  std::ostringstream js;
  harness::emit_json(records, js);
  const json parsed = json::parse(js.str());
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(harness::record_from_json(parsed[i]) == records[i]);
  }

  // Without timing the output is a pure function of the scenario.
  std::ostringstream again;
  harness::emit_csv(harness::run_scenario(quick), again);
  CHECK(again.str() == csv.str());
}

TEST_CASE("records agree with the cost model") {
  harness::Scenario s = harness::load_scenario("scenarios/compare_small.json");
  s.repetitions = 0;
  const SinkTree t = build_sink_tree(harness::resolve_network(s));
  for (const auto& m : s.methods) {
    const Solution sol = harness::run_method(m, t, s);
    const harness::RunRecord r = harness::make_record(s, m, t, sol, 0.0);
    CHECK(r.cost == doctest::Approx(sol.cost).epsilon(1e-9));
    double sum = 0.0;
    for (double v : r.allocation) sum += v;
    CHECK(sum == doctest::Approx(s.task_size).epsilon(1e-9));
  }
}

TEST_CASE("network files: unit conversions and round trip") {
  const json j = json::parse(R"({
    "units": {"cpu_freq": "MHz", "tx_power": "mW", "rate": "Mbps"},
    "servers": [{"id": 1, "cpu_freq": 500, "tx_power": 100, "gamma": 0},
                {"id": 0, "cpu_freq": 2000, "tx_power": 1000, "gamma": 1e-28}],
    "links": [{"i": 0, "j": 1, "rate": 250, "symmetric": true}]
  })");
  const NetworkGraph g = json_io::network_from_json(j);
  CHECK(g.server(0).cpu_freq == doctest::Approx(2e9));
  CHECK(g.server(1).cpu_freq == doctest::Approx(5e8));
  CHECK(g.server(0).tx_power == doctest::Approx(1.0));
  CHECK(g.server(1).tx_power == doctest::Approx(0.1));
  CHECK(*g.rate(1, 0) == doctest::Approx(2.5e8));

  const json named = json::parse(R"({
    "servers": [{"id": 0, "cpu_freq_ghz": 1, "tx_power_dbm": 30, "gamma": 0.01}],
    "links": []})");
  CHECK(json_io::network_from_json(named).server(0).tx_power == doctest::Approx(1.0));

  GenParams gp;
  gp.node_count = 8;
  gp.rng_seed = 4;
  const NetworkGraph rnd = generate_network(gp);
  const fs::path path = temp_dir() / "net.json";
  json_io::save_network(rnd, path.string());
  CHECK(json_io::load_network(path.string()) == rnd);

  CHECK_THROWS_AS(json_io::network_from_json(json::parse(R"({"servers": 3})")), ValidationError);
  CHECK_THROWS_AS(json_io::load_network((temp_dir() / "missing.json").string()), Error);
}

TEST_CASE("network loaded from a file next to the scenario") {
  const fs::path dir = temp_dir();
  json_io::save_network(topologies::mixed(3), (dir / "mixed.json").string());
  std::ofstream((dir / "scenario.json").string())
      << R"({"network": {"file": "mixed.json"}, "methods": ["pmo"], "repetitions": 0})";
  const harness::Scenario s = harness::load_scenario((dir / "scenario.json").string());
  CHECK(harness::resolve_network(s) == topologies::mixed(3));
}

TEST_CASE("baseline cache: miss, then hit by rescaling") {
  const SinkTree t = build_sink_tree(topologies::mixed(4));
  const CostParams p{{0.5, 0.05}, units::kDefaultCyclesPerBit};
  const fs::path path = temp_dir() / "cache.json";
  fs::remove(path);
  bool hit = true;
  const Solution first = harness::solve_cached(t, 1e9, p, path.string(), &hit);
  CHECK_FALSE(hit);
  const Solution second = harness::solve_cached(t, 3e9, p, path.string(), &hit);
  CHECK(hit);
  CHECK(second.cost == doctest::Approx(3 * first.cost).epsilon(1e-12));
  CHECK(second.cost == doctest::Approx(pmo(t, 3e9, p).cost).epsilon(1e-9));

  // A refresh period forces a re-solve once the entry has served enough answers.
  // The entry has served one answer already.
  for (bool expect : {true, true, false, true}) {
    harness::solve_cached(t, 2e9, p, path.string(), &hit, 3);
    CHECK(hit == expect);
  }

  // A different tree misses and replaces the entry.
  const SinkTree other = build_sink_tree(topologies::mixed(5));
  harness::solve_cached(other, 1e9, p, path.string(), &hit);
  CHECK_FALSE(hit);
}

TEST_CASE("verify suite passes on a shipped scenario") {
  harness::Scenario s = harness::load_scenario("scenarios/compare_small.json");
  s.repetitions = 0;
  for (const auto& c : harness::verify_instance(s)) CHECK_MESSAGE(c.pass, c.name << ": " << c.detail);
}
