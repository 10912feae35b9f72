// Command-line front end: generate networks, inspect sink trees, run
// solvers, comparisons and sweeps from scenario files.
#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "offload/errors.hpp"
#include "offload/harness.hpp"
#include "offload/json_io.hpp"

namespace {

using namespace offload;
namespace fs = std::filesystem;

struct Common {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "csv";
  std::optional<std::size_t> reps;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--scenario", c.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the scenario seed");
  cmd->add_option("--out", c.out, "Output directory (default: stdout)");
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--reps", c.reps, "Timing repetitions per method (0 disables timing)");
}

harness::Scenario load(const Common& c) {
  harness::Scenario s = harness::load_scenario(c.scenario);
  if (c.seed) {
    s.seed = *c.seed;
    s.ga.rng_seed = *c.seed;
  }
  if (c.reps) s.repetitions = *c.reps;
  return s;
}

void emit(const std::vector<harness::RunRecord>& records, const harness::Scenario& s, const Common& c) {
  std::string dir = c.out;
  if (dir.empty() && !s.output.empty()) dir = s.output;
  if (dir.empty()) {
    c.format == "json" ? harness::emit_json(records, std::cout) : harness::emit_csv(records, std::cout);
    return;
  }
  fs::create_directories(dir);
  const std::string path = (fs::path(dir) / (s.id + "." + c.format)).string();
  c.format == "json" ? harness::emit_json(records, path) : harness::emit_csv(records, path);
  std::cerr << "wrote " << records.size() << " records to " << path << '\n';
}

void print_tree(const SinkTree& t) {
  std::printf("%-6s %-8s %-8s %-6s %-12s %-10s %-10s %-10s\n", "tree", "server", "parent", "depth",
              "rate_gbps", "f_ghz", "p_dbm", "gamma");
  for (NodeId i = 0; i < t.size(); ++i) {
    const ServerParams& s = t.server(i);
    const std::string parent = i == kMaster ? "-" : std::to_string(t.original_id(t.parent(i)));
    std::printf("%-6zu %-8zu %-8s %-6zu %-12.6g %-10.6g %-10.6g %-10.3g\n", i, s.id, parent.c_str(),
                t.depth(i), i == kMaster ? 0.0 : units::bps_to_gbps(t.edge_rate(i)),
                units::hz_to_ghz(s.cpu_freq), units::watts_to_dbm(s.tx_power), s.switched_cap);
  }
  std::printf("height %zu, %zu subtrees\n", t.height(), t.subtrees().size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-hop computation offloading solvers and experiment harness"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a random network file");
  GenParams gp;
  double f_lo = 1.0, f_hi = 10.0, r_lo = 10.0, r_hi = 100.0;
  std::string gen_out;
  gen->add_option("--nodes", gp.node_count, "Servers including the master")->required();
  gen->add_option("--edge-prob", gp.edge_prob, "Link probability");
  gen->add_option("--seed", gp.rng_seed, "Generator seed");
  gen->add_option("--freq-min-ghz", f_lo);
  gen->add_option("--freq-max-ghz", f_hi);
  gen->add_option("--rate-min-gbps", r_lo);
  gen->add_option("--rate-max-gbps", r_hi);
  gen->add_option("--gamma", gp.gamma);
  gen->add_option("--tx-power-dbm", gp.tx_power_dbm);
  gen->add_option("--out", gen_out, "Output file (default: stdout)");

  // tree
  auto* tree = app.add_subcommand("tree", "Print the sink tree of a network");
  std::string tree_scenario, tree_network;
  auto* tree_src = tree->add_option_group("source");
  tree_src->add_option("--scenario", tree_scenario, "Scenario JSON file");
  tree_src->add_option("--network", tree_network, "Network JSON file");
  tree_src->require_option(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Run one method on the scenario's instance");
  Common solve_c;
  add_common(solve, solve_c);
  std::string method, cache;
  std::uint64_t refresh_after = 0;
  solve->add_option("--method", method, "Method (default: first in the scenario)");
  solve->add_option("--cache", cache, "Baseline cache file; answers by rescaling when it matches");
  solve->add_option("--refresh-after", refresh_after,
                    "Re-solve the cached baseline after this many reuses (0: never)");

  auto* compare = app.add_subcommand("compare", "Run every scenario method on one instance");
  Common compare_c;
  add_common(compare, compare_c);

  auto* sweep = app.add_subcommand("sweep", "Run the scenario's parameter sweep");
  Common sweep_c;
  add_common(sweep, sweep_c);

  auto* verify = app.add_subcommand("verify", "Check solver invariants on the scenario's instance");
  Common verify_c;
  add_common(verify, verify_c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      gp.freq_range = {units::ghz_to_hz(f_lo), units::ghz_to_hz(f_hi)};
      gp.rate_range = {units::gbps_to_bps(r_lo), units::gbps_to_bps(r_hi)};
      const NetworkGraph g = generate_network(gp);
      if (gen_out.empty()) {
        std::cout << json_io::to_json(g).dump(2) << '\n';
      } else {
        json_io::save_network(g, gen_out);
      }
      return 0;
    }
    if (tree->parsed()) {
      const NetworkGraph g = tree_network.empty()
                                 ? harness::resolve_network(harness::load_scenario(tree_scenario))
                                 : json_io::load_network(tree_network);
      print_tree(build_sink_tree(g));
      return 0;
    }
    if (solve->parsed()) {
      harness::Scenario s = load(solve_c);
      s.sweep.reset();
      if (method.empty()) method = s.methods.front();
      const SinkTree t = build_sink_tree(harness::resolve_network(s));
      Solution sol;
      if (!cache.empty()) {
        if (method != "pmo") throw ParameterError("--cache works with --method pmo only");
        bool hit = false;
        sol = harness::solve_cached(t, s.task_size, s.params, cache, &hit, refresh_after);
        std::cerr << (hit ? "cache hit: rescaled baseline\n" : "cache miss: solved and stored\n");
      } else {
        sol = harness::run_method(method, t, s);
      }
      const harness::RunRecord r = harness::make_record(s, method, t, sol, 0.0);
      emit({r}, s, solve_c);
      return 0;
    }
    if (compare->parsed()) {
      harness::Scenario s = load(compare_c);
      s.sweep.reset();
      emit(harness::run_scenario(s), s, compare_c);
      return 0;
    }
    if (sweep->parsed()) {
      harness::Scenario s = load(sweep_c);
      if (!s.sweep) throw ValidationError("scenario has no sweep");
      emit(harness::run_scenario(s), s, sweep_c);
      return 0;
    }
    if (verify->parsed()) {
      const harness::Scenario s = load(verify_c);
      int failed = 0;
      for (const auto& c : harness::verify_instance(s)) {
        std::printf("%s  %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.empty() ? "" : "  ", c.detail.c_str());
        failed += c.pass ? 0 : 1;
      }
      return failed == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
