#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

#include "offload/errors.hpp"
#include "offload/exact_solvers.hpp"
#include "oracles/minmax.hpp"

using namespace offload;

namespace {

const std::size_t R = oracle::kRoot;
const double kB = units::kDefaultCyclesPerBit;
const CostParams kTime{{1.0, 0.0}, kB};
const CostParams kMixed{{0.5, 0.05}, kB};

oracle::Instance fixed(std::vector<std::size_t> parent, double freq, double rate) {
  oracle::Instance in;
  const std::size_t n = parent.size();
  in.parent = std::move(parent);
  in.freq.assign(n, freq);
  in.power.assign(n, 1.0);
  in.gamma.assign(n, 1e-28);
  in.rate.assign(n, rate);
  return in;
}

// Optimum over every schedule, each solved by vertex enumeration.
double brute_force(const oracle::Instance& in, double total, const CostParams& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : oracle::all_schedules(in)) {
    const auto a = oracle::coefficients(in, s, p.weights.time, p.weights.energy, p.cycles_per_bit);
    best = std::min(best, oracle::vertex_min(a, total));
  }
  return best;
}

void check_consistent(const SinkTree& t, const Solution& s, const CostParams& p, double total) {
  validate(t, s.allocation);
  validate(t, s.schedule);
  CHECK(s.allocation.total == total);
  const CostBreakdown bd = system_cost(t, s.schedule, s.allocation, p);
  CHECK(s.cost == doctest::Approx(bd.system_cost).epsilon(1e-9));
}

}  // namespace

TEST_CASE("fixed order: solo master") {
  const SinkTree t = oracle::to_tree(fixed({R}, 1e9, 0.0));
  const Solution s = solve_fixed_order(t, Schedule::in_tree_order(t), 1e9, kTime);
  CHECK(s.allocation.y[0] == 1e9);
  CHECK(s.cost == doctest::Approx(1e-3));
}

TEST_CASE("fixed order: two-node equalization") {
  const SinkTree t = oracle::to_tree(fixed({R, 0}, 1e9, 1e10));
  const Solution s = solve_fixed_order(t, Schedule::in_tree_order(t), 1e9, kTime);
  // a00 = 1e-3 s/Gbit, a11 = 0.1 + 1e-3 s/Gbit
  const double y1 = 1e9 * 1e-3 / (1e-3 + 0.101);
  CHECK(s.allocation.y[1] == doctest::Approx(y1).epsilon(1e-12));
  CHECK(s.allocation.y[0] == doctest::Approx(0.990196e9).epsilon(1e-6));
  CHECK(s.cost == doctest::Approx(9.90196e-4).epsilon(1e-6));
  check_consistent(t, s, kTime, 1e9);

  // 1e-5 grid over y1
  double grid = std::numeric_limits<double>::infinity();
  for (int g = 0; g <= 100000; ++g) {
    const double v = 1e9 * g * 1e-5;
    grid = std::min(grid, std::max(1e-12 * (1e9 - v), 1.01e-10 * v));
  }
  CHECK(s.cost <= grid * (1 + 1e-12));
  CHECK(s.cost >= grid * (1 - 1e-4));
}

TEST_CASE("fixed order: three-node chain, each order against a grid") {
  oracle::Instance in = fixed({R, 0, 1}, 1e9, 1e10);
  in.freq = {1e9, 3e9, 7e9};
  in.rate = {0.0, 2e10, 5e10};
  const SinkTree t = oracle::to_tree(in);
  for (const auto& seqs : oracle::all_schedules(in)) {
    const Solution s = solve_fixed_order(t, oracle::to_schedule(t, seqs), 1e9, kTime);
    const auto a = oracle::coefficients(in, seqs, 1.0, 0.0, kB);
    const double grid = oracle::grid_min(a, 1e9, 10000);
    CHECK(s.cost <= grid * (1 + 1e-12));
    CHECK(s.cost >= grid * (1 - 1e-3));
    CHECK(s.cost == doctest::Approx(oracle::vertex_min(a, 1e9)).epsilon(1e-9));
  }
}

TEST_CASE("fixed order: errors") {
  const SinkTree t = oracle::to_tree(fixed({R, 0}, 1e9, 1e10));
  const Schedule s = Schedule::in_tree_order(t);
  CHECK_THROWS_AS(solve_fixed_order(t, s, -1.0, kTime), ParameterError);
  CHECK_THROWS_AS(solve_fixed_order(t, s, 1.0, kTime, {0, 1}), InfeasibleError);
  CHECK_THROWS_AS(solve_fixed_order(t, s, 1.0, kTime, {7}), ParameterError);
  const Solution forced = solve_fixed_order(t, s, 1e9, kTime, {1});
  CHECK(forced.allocation.y[1] == 0.0);
}

TEST_CASE("schedule enumeration") {
  auto count = [](std::vector<std::size_t> parent) {
    return ScheduleEnumerator(oracle::to_tree(fixed(std::move(parent), 1e9, 1e10))).count();
  };
  CHECK(count({R}) == 1);
  CHECK(count({R, 0, 0}) == 1);
  CHECK(count({R, 0, 1, 1}) == 6);
  CHECK(count({R, 0, 0, 1, 1, 2}) == 12);

  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const oracle::Instance in = fixed(oracle::random_tree(1 + rng() % 7, 0, rng), 1e9, 1e10);
    const SinkTree t = oracle::to_tree(in);
    const std::vector<Schedule> all = enumerate_schedules(t);
    CHECK(all.size() == oracle::all_schedules(in).size());
    const std::set<Schedule> distinct(all.begin(), all.end());
    CHECK(distinct.size() == all.size());
    for (const auto& s : all) CHECK_NOTHROW(validate(t, s));
  }
}

TEST_CASE("schedule enumeration varies the last subtree fastest") {
  const SinkTree t = oracle::to_tree(fixed({R, 0, 0, 1, 2}, 1e9, 1e10));
  REQUIRE(t.subtrees().size() == 2);
  const ScheduleEnumerator e(t);
  REQUIRE(e.count() == 4);
  CHECK(e.at(0).sequences[0] == e.at(1).sequences[0]);
  CHECK(e.at(0).sequences[1] != e.at(1).sequences[1]);
  CHECK(e.at(0).sequences[0] != e.at(2).sequences[0]);
  CHECK_THROWS_AS(e.at(4), ContractError);
}

TEST_CASE("cmo small cases") {
  SUBCASE("zero task") {
    const SinkTree t = oracle::to_tree(fixed({R, 0, 1}, 1e9, 1e10));
    const Solution s = cmo(t, 0.0, kTime);
    CHECK(s.cost == 0.0);
    for (double v : s.allocation.y) CHECK(v == 0.0);
  }
  SUBCASE("a star has one schedule") {
    const SinkTree t = oracle::to_tree(fixed({R, 0, 0}, 1e9, 1e10));
    const Solution s = cmo(t, 1e9, kTime);
    const Solution f = solve_fixed_order(t, Schedule::in_tree_order(t), 1e9, kTime);
    CHECK(s.cost == f.cost);
    CHECK(s.allocation.y == f.allocation.y);
    CHECK(s.stats.schedules_evaluated == 1);
  }
  SUBCASE("chain of three below the master") {
    oracle::Instance in = fixed({R, 0, 1, 2}, 1e9, 1e10);
    in.freq = {1e9, 2e9, 9e9, 4e9};
    in.rate = {0.0, 8e10, 3e10, 6e10};
    const SinkTree t = oracle::to_tree(in);
    const Solution s = cmo(t, 1e9, kTime);
    CHECK(s.stats.schedules_evaluated == 6);
    CHECK(s.cost == doctest::Approx(brute_force(in, 1e9, kTime)).epsilon(1e-9));
    double grid = std::numeric_limits<double>::infinity();
    for (const auto& seqs : oracle::all_schedules(in)) {
      grid = std::min(grid, oracle::grid_min(oracle::coefficients(in, seqs, 1.0, 0.0, kB), 1e9, 300));
    }
    CHECK(s.cost <= grid * (1 + 1e-12));
    // The grid is coarse at four nodes; the vertex oracle above is the exact check.
    CHECK(s.cost >= grid * (1 - 1e-2));
  }
}

TEST_CASE("cmo matches the brute-force optimum on random trees") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 60; ++rep) {
    oracle::Instance in = oracle::random_instance(oracle::random_tree(2 + rng() % 4, 0, rng), rng);
    for (auto& g : in.gamma) g = 1e-28;
    const SinkTree t = oracle::to_tree(in);
    const CostParams& p = rep % 2 ? kTime : kMixed;
    const double total = oracle::uniform(rng, 1e8, 1e10);
    const Solution s = cmo(t, total, p);
    check_consistent(t, s, p, total);
    CHECK(s.cost == doctest::Approx(brute_force(in, total, p)).epsilon(1e-9));
    // The cost is the tight epigraph value: the busiest node sits on it.
    double peak = 0.0;
    for (const auto& c : s.breakdown.nodes) peak = std::max(peak, c.cost);
    CHECK(s.cost == doctest::Approx(peak).epsilon(1e-12));
  }
}

TEST_CASE("cmo gives the same answer on any thread count") {
  std::mt19937_64 rng(4);
  const oracle::Instance in = oracle::random_instance(oracle::random_tree(7, 2, rng), rng);
  const SinkTree t = oracle::to_tree(in);
  const Solution one = cmo(t, 1e9, kTime, {}, {1});
  for (unsigned th : {2u, 3u, 8u}) {
    const Solution many = cmo(t, 1e9, kTime, {}, {th});
    CHECK(many.cost == one.cost);
    CHECK(many.schedule == one.schedule);
    CHECK(many.allocation.y == one.allocation.y);
  }
}

TEST_CASE("pmo agrees with cmo") {
  SUBCASE("single subtree") {
    const oracle::Instance in = fixed({R, 0, 1, 1}, 2e9, 3e10);
    const SinkTree t = oracle::to_tree(in);
    CHECK(pmo(t, 1e9, kTime).cost == doctest::Approx(cmo(t, 1e9, kTime).cost).epsilon(1e-12));
  }
  SUBCASE("two two-node subtrees") {
    oracle::Instance in = fixed({R, 0, 0, 1, 2}, 1e9, 1e10);
    in.freq = {1e9, 5e9, 2e9, 8e9, 3e9};
    in.rate = {0.0, 4e10, 9e10, 2e10, 7e10};
    const SinkTree t = oracle::to_tree(in);
    for (const CostParams& p : {kTime, kMixed}) {
      const Solution a = pmo(t, 1e9, p);
      CHECK(a.cost == doctest::Approx(cmo(t, 1e9, p).cost).epsilon(1e-7));
      check_consistent(t, a, p, 1e9);
    }
  }
  SUBCASE("random trees") {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 60; ++rep) {
      oracle::Instance in =
          oracle::random_instance(oracle::random_tree(2 + rng() % 6, 1 + rng() % 3, rng), rng);
      for (auto& g : in.gamma) g = rep % 3 == 0 ? 1e-2 : 1e-28;
      const SinkTree t = oracle::to_tree(in);
      const CostParams& p = rep % 2 ? kTime : kMixed;
      const Solution a = pmo(t, 1e9, p);
      check_consistent(t, a, p, 1e9);
      CHECK(a.cost == doctest::Approx(cmo(t, 1e9, p).cost).epsilon(1e-7));
    }
  }
  SUBCASE("forced zeros carry through") {
    const oracle::Instance in = fixed({R, 0, 0, 1, 2}, 1e9, 1e10);
    const SinkTree t = oracle::to_tree(in);
    const std::set<NodeId> fz{1, 4};
    const Solution a = pmo(t, 1e9, kTime, fz);
    validate(t, a.allocation, fz);
    CHECK(a.cost == doctest::Approx(cmo(t, 1e9, kTime, fz).cost).epsilon(1e-7));
  }
}

TEST_CASE("master split") {
  const SinkTree t = oracle::to_tree(fixed({R, 0, 0}, 1e9, 1e10));
  const double m = kB / 1e9;  // master slope under w = (1, 0)
  auto probe = [](std::size_t k, double slope) {
    SubtreeSolution s;
    s.subtree = k;
    s.probe_load = 2.0;
    s.probe_cost = 2.0 * slope;
    return s;
  };
  SUBCASE("zero task") {
    const MasterSplit r = solve_master_split({probe(0, m), probe(1, m)}, t, 0.0, kTime);
    CHECK(r.master == 0.0);
    CHECK(r.subtree_load == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("symmetric subtrees share equally") {
    const MasterSplit r = solve_master_split({probe(0, 3 * m), probe(1, 3 * m)}, t, 1e9, kTime);
    CHECK(r.subtree_load[0] == doctest::Approx(r.subtree_load[1]).epsilon(1e-12));
    CHECK(r.master == doctest::Approx(3 * r.subtree_load[0]).epsilon(1e-12));
  }
  SUBCASE("a cheap subtree takes almost everything") {
    const double s = m * 1e-4;
    SubtreeSolution idle = probe(1, m);
    idle.probe_load = 0.0;
    idle.probe_cost = 0.0;
    const MasterSplit r = solve_master_split({probe(0, s), idle}, t, 1e9, kTime);
    CHECK(r.subtree_load[0] == doctest::Approx(1e9 * m / (m + s)).epsilon(1e-12));
    CHECK(r.subtree_load[1] == 0.0);
    CHECK(r.subtree_load[0] > 0.9999 * 1e9);
  }
  SUBCASE("no usable subtree leaves the master with the local cost") {
    SubtreeSolution a = probe(0, m), b = probe(1, m);
    a.probe_load = b.probe_load = 0.0;
    const MasterSplit r = solve_master_split({a, b}, t, 1e9, kMixed);
    CHECK(r.master == 1e9);
    const ServerParams& srv = t.server(0);
    const double local = 0.5 * compute_time(srv, 1e9, kB) + 0.05 * compute_energy(srv, 1e9, kB);
    CHECK(r.cost == doctest::Approx(local).epsilon(1e-12));
  }
}

TEST_CASE("rescaling") {
  std::mt19937_64 rng(30);
  const oracle::Instance in = oracle::random_instance(oracle::random_tree(6, 2, rng), rng);
  const SinkTree t = oracle::to_tree(in);
  const Solution base = pmo(t, 1e9, kMixed);

  const Solution same = scale_solution(base, 1e9);
  CHECK(same.cost == base.cost);
  CHECK(same.allocation.y == base.allocation.y);

  const Solution twice = scale_solution(base, 2e9);
  CHECK(twice.cost == 2 * base.cost);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(twice.allocation.y[i] == 2 * base.allocation.y[i]);
  CHECK(twice.schedule == base.schedule);
  CHECK(twice.cost == doctest::Approx(pmo(t, 2e9, kMixed).cost).epsilon(1e-9));

  const Solution none = scale_solution(base, 0.0);
  CHECK(none.cost == 0.0);
  for (double v : none.allocation.y) CHECK(v == 0.0);

  CHECK_THROWS_AS(scale_solution(base, -1.0), ParameterError);
}

TEST_CASE("tree hash and baseline cache") {
  oracle::Instance in = fixed({R, 0, 0, 1}, 1e9, 1e10);
  const SinkTree t = oracle::to_tree(in);
  const std::string h = tree_hash(t, kMixed);
  CHECK(h.size() == 16);
  CHECK(tree_hash(oracle::to_tree(in), kMixed) == h);
  CHECK(tree_hash(t, kTime) != h);
  in.rate[3] = 2e10;
  CHECK(tree_hash(oracle::to_tree(in), kMixed) != h);

  const std::string path =
      (std::filesystem::temp_directory_path() / "offload_exact_test_cache.json").string();
  const Solution sol = pmo(t, 1e9, kMixed);
  save_baseline({h, 1e9, kMixed, sol}, path);
  const auto back = load_baseline(path);
  REQUIRE(back.has_value());
  CHECK(back->tree_hash == h);
  CHECK(back->task_size == 1e9);
  CHECK(back->params.weights == kMixed.weights);
  CHECK(back->solution.cost == sol.cost);
  CHECK(back->solution.allocation.y == sol.allocation.y);
  CHECK(back->solution.schedule == sol.schedule);
  std::filesystem::remove(path);
  CHECK_FALSE(load_baseline(path).has_value());
}
