#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "offload/cost_model.hpp"
#include "offload/exact_solvers.hpp"
#include "offload/heuristics.hpp"
#include "offload/network.hpp"

namespace offload::harness {

using nlohmann::json;

struct Sweep {
  std::string parameter;  // see sweep_parameters()
  std::vector<double> values;
  std::optional<NodeId> node;                    // cpu_freq_ghz: original server id
  std::optional<std::pair<NodeId, NodeId>> link;  // link_rate_gbps: original ids
};

struct Scenario {
  std::string id = "scenario";
  json network;             // {file|inline|generate|topology: ...}
  std::string base_dir = ".";  // relative network file paths resolve here
  double task_size = units::gbit_to_bits(1.0);
  CostParams params;
  std::vector<std::string> methods;
  NpParams np;
  LpParams lp;
  GaParams ga;
  std::optional<Sweep> sweep;
  std::string output;  // optional output path
  std::uint64_t seed = 0;
  std::size_t repetitions = 20;
};

const std::vector<std::string>& method_names();
const std::vector<std::string>& sweep_parameters();

/// Throws ValidationError listing every offending field.
Scenario parse_scenario(const json& j, const std::string& base_dir = ".");
Scenario load_scenario(const std::string& path);
json to_json(const Scenario& s);

/// The network of the scenario, before any sweep is applied.
NetworkGraph resolve_network(const Scenario& s);

struct RunRecord {
  std::string scenario_id;
  std::string method;
  std::string sweep_param;  // empty without a sweep
  std::optional<double> sweep_value;
  double cost = 0.0;
  double max_t_total = 0.0;
  double max_e_total = 0.0;
  double t_exe = 0.0;  // seconds, mean over repetitions
  std::vector<double> allocation;               // by original server id
  std::vector<std::vector<NodeId>> schedule;    // original server ids

  bool operator==(const RunRecord&) const = default;
};

/// Runs one method on one tree. The solution lives on `t`.
Solution run_method(const std::string& method, const SinkTree& t, const Scenario& s);

RunRecord make_record(const Scenario& s, const std::string& method, const SinkTree& t,
                      const Solution& sol, double t_exe);

/// Every method at every sweep point (or once without a sweep), ordered by
/// point index, then method order in the scenario.
std::vector<RunRecord> run_scenario(const Scenario& s);

/// Answers from the cache at `path` when the tree matches, otherwise solves
/// with PMO and stores the result there.
// Answers from the baseline cache at `path` by rescaling when the tree matches,
// otherwise solves with pmo and stores the result. With refresh_after > 0 an
// entry is re-solved once it has served that many answers.
Solution solve_cached(const SinkTree& t, double task_size, const CostParams& p,
                      const std::string& path, bool* hit = nullptr,
                      std::uint64_t refresh_after = 0);

void emit_csv(const std::vector<RunRecord>& records, std::ostream& out);
void emit_json(const std::vector<RunRecord>& records, std::ostream& out);
void emit_csv(const std::vector<RunRecord>& records, const std::string& path);
void emit_json(const std::vector<RunRecord>& records, const std::string& path);

json to_json(const RunRecord& r);
RunRecord record_from_json(const json& j);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Invariant checks on the scenario's (unswept) instance.
std::vector<Check> verify_instance(const Scenario& s);

}  // namespace offload::harness
