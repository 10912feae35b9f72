#include "offload/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "offload/errors.hpp"
#include "offload/json_io.hpp"
#include "offload/topologies.hpp"

namespace offload::harness {

const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {
      "cmo",    "pmo",    "ga",    "np+pmo",  "lp+pmo",  "np+ga",         "lp+ga",
      "np+cmo", "lp+cmo", "local", "partial", "master_worker", "multi_hop"};
  return names;
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = {"theta_p",        "xi",           "task_size_gbit",
                                                 "link_rate_gbps", "cpu_freq_ghz", "subtree_count"};
  return names;
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// Collects field errors so that one ValidationError can list all of them.
class Errors {
 public:
  void add(const std::string& field, const std::string& what) {
    items_.push_back(field + ": " + what);
  }

  template <class Fn>
  void guard(const std::string& field, Fn&& fn) {
    try {
      fn();
    } catch (const json::exception& e) {
      add(field, e.what());
    } catch (const Error& e) {
      add(field, e.what());
    }
  }

  void raise_if_any() const {
    if (items_.empty()) return;
    std::string msg = "invalid scenario:";
    for (const auto& s : items_) msg += "\n  " + s;
    throw ValidationError(msg);
  }

 private:
  std::vector<std::string> items_;
};

MutationOperator mutation_from(const std::string& s) {
  if (s == "swap") return MutationOperator::swap;
  if (s == "shuffle") return MutationOperator::shuffle;
  throw ParameterError("unknown mutation operator '" + s + "'");
}

const char* to_string(MutationOperator m) { return m == MutationOperator::swap ? "swap" : "shuffle"; }

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

GenParams gen_params_from(const json& g, std::uint64_t fallback_seed) {
  GenParams p;
  p.node_count = g.at("nodes").get<std::size_t>();
  p.edge_prob = g.value("edge_prob", p.edge_prob);
  if (g.contains("freq_range_ghz")) {
    const auto r = g["freq_range_ghz"].get<std::pair<double, double>>();
    p.freq_range = {units::ghz_to_hz(r.first), units::ghz_to_hz(r.second)};
  }
  if (g.contains("rate_range_gbps")) {
    const auto r = g["rate_range_gbps"].get<std::pair<double, double>>();
    p.rate_range = {units::gbps_to_bps(r.first), units::gbps_to_bps(r.second)};
  }
  p.gamma = g.value("gamma", p.gamma);
  p.tx_power_dbm = g.value("tx_power_dbm", p.tx_power_dbm);
  p.rng_seed = g.value("seed", fallback_seed);
  return p;
}

NetworkGraph network_for(const Scenario& s, std::optional<std::size_t> subtree_count) {
  const json& n = s.network;
  if (n.contains("file")) {
    std::filesystem::path path = n["file"].get<std::string>();
    if (path.is_relative()) path = std::filesystem::path(s.base_dir) / path;
    return json_io::load_network(path.string());
  }
  if (n.contains("inline")) return json_io::network_from_json(n["inline"]);
  if (n.contains("generate")) return generate_network(gen_params_from(n["generate"], s.seed));
  if (n.contains("topology")) {
    const std::size_t k = subtree_count.value_or(n.value("subtrees", std::size_t{2}));
    return topologies::by_name(n["topology"].get<std::string>(), n.value("seed", s.seed), k);
  }
  throw ValidationError("network: expected one of file, inline, generate, topology");
}

void set_link_rate(NetworkGraph& g, NodeId a, NodeId b, double rate) {
  bool any = false;
  if (g.rate(a, b)) {
    g.set_rate(a, b, rate);
    any = true;
  }
  if (g.rate(b, a)) {
    g.set_rate(b, a, rate);
    any = true;
  }
  if (!any) throw ParameterError("no link between " + std::to_string(a) + " and " + std::to_string(b));
}

struct Point {
  SinkTree tree;
  Scenario scenario;
};

Point apply_sweep(const Scenario& base, const NetworkGraph& graph, double value) {
  Point pt{{}, base};
  Scenario& s = pt.scenario;
  NetworkGraph g = graph;
  const Sweep& sw = *base.sweep;
  const std::string& name = sw.parameter;
  if (name == "theta_p") {
    s.np.theta_p = value;
  } else if (name == "xi") {
    s.lp.xi = static_cast<std::size_t>(value);
  } else if (name == "task_size_gbit") {
    s.task_size = units::gbit_to_bits(value);
  } else if (name == "link_rate_gbps") {
    set_link_rate(g, sw.link->first, sw.link->second, units::gbps_to_bps(value));
  } else if (name == "cpu_freq_ghz") {
    if (*sw.node >= g.size()) throw ParameterError("sweep node not in network");
    g.server(*sw.node).cpu_freq = units::ghz_to_hz(value);
  } else if (name == "subtree_count") {
    g = network_for(base, static_cast<std::size_t>(value));
  }
  pt.tree = build_sink_tree(g);
  return pt;
}

}  // namespace

Scenario parse_scenario(const json& j, const std::string& base_dir) {
  Scenario s;
  s.base_dir = base_dir;
  Errors err;
  if (!j.is_object()) throw ValidationError("invalid scenario: expected a JSON object");

  err.guard("id", [&] { s.id = j.value("id", s.id); });
  err.guard("seed", [&] { s.seed = j.value("seed", s.seed); });
  err.guard("repetitions", [&] {
    const long long r = j.value("repetitions", static_cast<long long>(s.repetitions));
    if (r < 0) throw ParameterError("must be >= 0");
    s.repetitions = static_cast<std::size_t>(r);
  });
  err.guard("output", [&] { s.output = j.value("output", std::string{}); });

  if (!j.contains("network")) {
    err.add("network", "missing");
  } else {
    s.network = j["network"];
    const int kinds = static_cast<int>(s.network.is_object() && s.network.contains("file")) +
                      static_cast<int>(s.network.is_object() && s.network.contains("inline")) +
                      static_cast<int>(s.network.is_object() && s.network.contains("generate")) +
                      static_cast<int>(s.network.is_object() && s.network.contains("topology"));
    if (kinds != 1) err.add("network", "expected exactly one of file, inline, generate, topology");
  }

  err.guard("task_size_gbit", [&] {
    const double y = j.value("task_size_gbit", 1.0);
    if (!(y >= 0.0) || !std::isfinite(y)) throw ParameterError("must be >= 0");
    s.task_size = units::gbit_to_bits(y);
  });
  err.guard("weights", [&] {
    if (j.contains("weights")) s.params.weights = json_io::weights_from_json(j["weights"]);
    validate(s.params.weights);
  });
  err.guard("cycles_per_gbit", [&] {
    const double b = j.value("cycles_per_gbit", 1e6);
    if (!(b >= 0.0) || !std::isfinite(b)) throw ParameterError("must be >= 0");
    s.params.cycles_per_bit = units::per_gbit_to_per_bit(b);
  });

  err.guard("methods", [&] {
    s.methods = j.at("methods").get<std::vector<std::string>>();
    if (s.methods.empty()) throw ParameterError("at least one method is required");
  });
  for (const auto& m : s.methods) {
    if (!contains(method_names(), m)) err.add("methods", "unknown method '" + m + "'");
  }

  const json params = j.value("params", json::object());
  s.ga.rng_seed = s.seed;
  err.guard("params.np", [&] {
    if (params.contains("np")) s.np.theta_p = params["np"].at("theta_p").get<double>();
    validate(s.np);
  });
  err.guard("params.lp", [&] {
    if (params.contains("lp")) {
      const long long xi = params["lp"].at("xi").get<long long>();
      if (xi < 0) throw ParameterError("xi must be >= 0");
      s.lp.xi = static_cast<std::size_t>(xi);
    }
  });
  err.guard("params.ga", [&] {
    if (params.contains("ga")) {
      const json& g = params["ga"];
      s.ga.population = g.value("population", s.ga.population);
      s.ga.generations = g.value("generations", s.ga.generations);
      s.ga.elite_frac = g.value("elite_frac", s.ga.elite_frac);
      s.ga.mutation_prob = g.value("mutation_prob", s.ga.mutation_prob);
      s.ga.rng_seed = g.value("seed", s.ga.rng_seed);
      s.ga.mutation = mutation_from(g.value("mutation", std::string("swap")));
    }
    validate(s.ga);
  });
  for (const auto& m : s.methods) {
    if (m.starts_with("np+") && !params.contains("np") &&
        !(j.contains("sweep") && j["sweep"].value("parameter", "") == "theta_p")) {
      err.add("params.np", "required by method '" + m + "'");
    }
    if (m.starts_with("lp+") && !params.contains("lp") &&
        !(j.contains("sweep") && j["sweep"].value("parameter", "") == "xi")) {
      err.add("params.lp", "required by method '" + m + "'");
    }
  }

  if (j.contains("sweep")) {
    err.guard("sweep", [&] {
      const json& w = j["sweep"];
      Sweep sw;
      sw.parameter = w.at("parameter").get<std::string>();
      if (!contains(sweep_parameters(), sw.parameter)) {
        throw ParameterError("unknown sweep parameter '" + sw.parameter + "'");
      }
      sw.values = w.at("values").get<std::vector<double>>();
      if (sw.values.empty()) throw ParameterError("values must not be empty");
      if (sw.parameter == "link_rate_gbps") {
        sw.link = w.at("link").get<std::pair<NodeId, NodeId>>();
      }
      if (sw.parameter == "cpu_freq_ghz") sw.node = w.at("node").get<NodeId>();
      if (sw.parameter == "subtree_count" &&
          !(s.network.is_object() && s.network.value("topology", "") == "subtree_family")) {
        throw ParameterError("subtree_count needs network.topology = subtree_family");
      }
      for (double v : sw.values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("values must be >= 0");
        if ((sw.parameter == "link_rate_gbps" || sw.parameter == "cpu_freq_ghz") && v == 0.0) {
          throw ParameterError("rates and frequencies must be > 0");
        }
        if ((sw.parameter == "xi" || sw.parameter == "subtree_count") && v != std::floor(v)) {
          throw ParameterError("values must be integers");
        }
        if (sw.parameter == "theta_p" && v > 1.0) throw ParameterError("theta_p must be <= 1");
      }
      s.sweep = std::move(sw);
    });
  }
  err.raise_if_any();
  return s;
}

Scenario load_scenario(const std::string& path) {
  const json j = json_io::read_file(path);
  return parse_scenario(j, std::filesystem::path(path).parent_path().string());
}

json to_json(const Scenario& s) {
  json j;
  j["id"] = s.id;
  j["network"] = s.network;
  j["task_size_gbit"] = units::bits_to_gbit(s.task_size);
  j["weights"] = json_io::to_json(s.params.weights);
  j["cycles_per_gbit"] = s.params.cycles_per_bit * units::kGiga;
  j["methods"] = s.methods;
  j["params"] = {{"np", {{"theta_p", s.np.theta_p}}},
                 {"lp", {{"xi", s.lp.xi}}},
                 {"ga",
                  {{"population", s.ga.population},
                   {"generations", s.ga.generations},
                   {"elite_frac", s.ga.elite_frac},
                   {"mutation_prob", s.ga.mutation_prob},
                   {"seed", s.ga.rng_seed},
                   {"mutation", to_string(s.ga.mutation)}}}};
  if (s.sweep) {
    json w = {{"parameter", s.sweep->parameter}, {"values", s.sweep->values}};
    if (s.sweep->node) w["node"] = *s.sweep->node;
    if (s.sweep->link) w["link"] = *s.sweep->link;
    j["sweep"] = w;
  }
  if (!s.output.empty()) j["output"] = s.output;
  j["seed"] = s.seed;
  j["repetitions"] = s.repetitions;
  return j;
}

NetworkGraph resolve_network(const Scenario& s) { return network_for(s, std::nullopt); }

Solution run_method(const std::string& method, const SinkTree& t, const Scenario& s) {
  const double y = s.task_size;
  const CostParams& p = s.params;
  if (method == "cmo") return cmo(t, y, p);
  if (method == "pmo") return pmo(t, y, p);
  if (method == "ga") return ga(t, y, p, s.ga).solution;
  if (method == "local") return baseline_local(t, y, p);
  if (method == "partial") return baseline_partial(t, y, p);
  if (method == "master_worker") return baseline_master_worker(t, y, p);
  if (method == "multi_hop") return baseline_multi_hop(t, y, p);

  const auto plus = method.find('+');
  if (plus == std::string::npos) throw ParameterError("unknown method '" + method + "'");
  const std::string pruner = method.substr(0, plus);
  const std::string solver = method.substr(plus + 1);
  PrunedTree pruned;
  if (pruner == "np") {
    pruned = node_prune(t, s.np, y, p).pruned;
  } else if (pruner == "lp") {
    pruned = level_prune(t, s.lp);
  } else {
    throw ParameterError("unknown method '" + method + "'");
  }
  Solution sol;
  if (solver == "pmo") {
    sol = pmo(pruned.tree, y, p, pruned.forced_zero);
  } else if (solver == "cmo") {
    sol = cmo(pruned.tree, y, p, pruned.forced_zero);
  } else if (solver == "ga") {
    sol = ga(pruned.tree, y, p, s.ga, pruned.forced_zero).solution;
  } else {
    throw ParameterError("unknown method '" + method + "'");
  }
  sol = lift_solution(t, pruned.tree, sol, p);
  sol.solver_tag = method;
  return sol;
}

RunRecord make_record(const Scenario& s, const std::string& method, const SinkTree& t,
                      const Solution& sol, double t_exe) {
  validate(t, sol.allocation);
  const CostBreakdown check = system_cost(t, sol.schedule, sol.allocation, s.params);
  const double scale = std::max(std::abs(sol.cost), std::abs(check.system_cost));
  if (std::abs(check.system_cost - sol.cost) > 1e-9 * scale) {
    throw Error(method + ": reported cost " + format_number(sol.cost) +
                " disagrees with the cost model (" + format_number(check.system_cost) + ")");
  }

  RunRecord r;
  r.scenario_id = s.id;
  r.method = method;
  r.cost = sol.cost;
  r.max_t_total = check.max_total_time();
  r.max_e_total = check.max_total_energy();
  r.t_exe = t_exe;
  r.allocation.assign(t.size(), 0.0);
  for (NodeId i = 0; i < t.size(); ++i) r.allocation.at(t.original_id(i)) = sol.allocation.y[i];
  for (const auto& seq : sol.schedule.sequences) {
    std::vector<NodeId> orig;
    for (NodeId i : seq) orig.push_back(t.original_id(i));
    r.schedule.push_back(std::move(orig));
  }
  return r;
}

std::vector<RunRecord> run_scenario(const Scenario& s) {
  const NetworkGraph graph = resolve_network(s);
  std::vector<Point> points;
  std::vector<double> values;
  if (s.sweep) {
    for (double v : s.sweep->values) {
      points.push_back(apply_sweep(s, graph, v));
      values.push_back(v);
    }
  } else {
    points.push_back({build_sink_tree(graph), s});
  }

  std::vector<RunRecord> out;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const Point& pt = points[k];
    for (const auto& method : s.methods) {
      using clock = std::chrono::steady_clock;
      Solution sol = run_method(method, pt.tree, pt.scenario);
      double t_exe = 0.0;
      if (s.repetitions > 0) {
        double total = 0.0;
        for (std::size_t r = 0; r < s.repetitions; ++r) {
          const auto t0 = clock::now();
          sol = run_method(method, pt.tree, pt.scenario);
          total += std::chrono::duration<double>(clock::now() - t0).count();
        }
        t_exe = total / static_cast<double>(s.repetitions);
      }
      RunRecord r = make_record(pt.scenario, method, pt.tree, sol, t_exe);
      if (s.sweep) {
        r.sweep_param = s.sweep->parameter;
        r.sweep_value = values[k];
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

Solution solve_cached(const SinkTree& t, double task_size, const CostParams& p,
                      const std::string& path, bool* hit, std::uint64_t refresh_after) {
  const std::string hash = tree_hash(t, p);
  auto cached = load_baseline(path);
  if (cached && cached->tree_hash == hash && cached->solution.base_task_size > 0.0 &&
      (refresh_after == 0 || cached->reuses < refresh_after)) {
    if (hit) *hit = true;
    ++cached->reuses;
    save_baseline(*cached, path);
    return scale_solution(cached->solution, task_size);
  }
  if (hit) *hit = false;
  Solution sol = pmo(t, task_size, p);
  if (task_size > 0.0) save_baseline({hash, task_size, p, sol}, path);
  return sol;
}

void emit_csv(const std::vector<RunRecord>& records, std::ostream& out) {
  std::size_t width = 0;
  for (const auto& r : records) width = std::max(width, r.allocation.size());
  out << "scenario_id,method,sweep_param,sweep_value,cost_J,max_T_total_s,max_E_total_J,T_exe_s";
  for (std::size_t i = 0; i < width; ++i) out << ",y_" << i;
  out << '\n';
  for (const auto& r : records) {
    out << r.scenario_id << ',' << r.method << ',' << r.sweep_param << ','
        << (r.sweep_value ? format_number(*r.sweep_value) : std::string{}) << ','
        << format_number(r.cost) << ',' << format_number(r.max_t_total) << ','
        << format_number(r.max_e_total) << ',' << format_number(r.t_exe);
    for (std::size_t i = 0; i < width; ++i) {
      out << ',';
      if (i < r.allocation.size()) out << format_number(r.allocation[i]);
    }
    out << '\n';
  }
}

json to_json(const RunRecord& r) {
  json j = {{"scenario_id", r.scenario_id},
            {"method", r.method},
            {"sweep_param", r.sweep_param},
            {"sweep_value", nullptr},
            {"cost_J", r.cost},
            {"max_T_total_s", r.max_t_total},
            {"max_E_total_J", r.max_e_total},
            {"T_exe_s", r.t_exe},
            {"y", r.allocation},
            {"schedule", r.schedule}};
  if (r.sweep_value) j["sweep_value"] = *r.sweep_value;
  return j;
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.scenario_id = j.at("scenario_id");
  r.method = j.at("method");
  r.sweep_param = j.at("sweep_param");
  if (!j.at("sweep_value").is_null()) r.sweep_value = j["sweep_value"].get<double>();
  r.cost = j.at("cost_J");
  r.max_t_total = j.at("max_T_total_s");
  r.max_e_total = j.at("max_E_total_J");
  r.t_exe = j.at("T_exe_s");
  r.allocation = j.at("y").get<std::vector<double>>();
  r.schedule = j.at("schedule").get<std::vector<std::vector<NodeId>>>();
  return r;
}

void emit_json(const std::vector<RunRecord>& records, std::ostream& out) {
  json arr = json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  out << arr.dump(2) << '\n';
}

void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  emit_csv(records, out);
}

void emit_json(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  emit_json(records, out);
}

// ---------------------------------------------------------------------------
// verify

std::vector<Check> verify_instance(const Scenario& s) {
  std::vector<Check> checks;
  const SinkTree t = build_sink_tree(resolve_network(s));
  const double y = s.task_size;
  const CostParams& p = s.params;
  auto rel = [](double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
  };

  std::uint64_t count = 0;
  try {
    count = ScheduleEnumerator(t).count();
  } catch (const ParameterError&) {
    count = UINT64_MAX;
  }
  constexpr std::uint64_t kExactLimit = 200000;
  const bool exact = count <= kExactLimit;

  const Solution pm = pmo(t, y, p);
  checks.push_back({"pmo cost matches the cost model",
                    rel(pm.cost, system_cost(t, pm.schedule, pm.allocation, p).system_cost) <= 1e-9,
                    format_number(pm.cost)});
  try {
    validate(t, pm.allocation);
    checks.push_back({"pmo allocation is feasible", true, ""});
  } catch (const Error& e) {
    checks.push_back({"pmo allocation is feasible", false, e.what()});
  }

  double best = pm.cost;
  if (exact) {
    const Solution cm = cmo(t, y, p);
    best = cm.cost;
    checks.push_back({"pmo equals cmo", rel(pm.cost, cm.cost) <= 1e-7,
                      format_number(pm.cost) + " vs " + format_number(cm.cost)});
    checks.push_back({"cmo evaluates every schedule", cm.stats.schedules_evaluated == count,
                      std::to_string(cm.stats.schedules_evaluated)});
  } else {
    checks.push_back({"pmo equals cmo", true, "skipped: too many schedules for cmo"});
  }

  for (const char* name : {"local", "partial", "master_worker", "multi_hop"}) {
    const Solution b = run_method(name, t, s);
    checks.push_back({std::string("optimum <= ") + name, best <= b.cost + 1e-9 * b.cost,
                      format_number(best) + " vs " + format_number(b.cost)});
  }

  if (y > 0.0) {
    const Solution scaled = scale_solution(pm, 2.0 * y);
    const Solution fresh = pmo(t, 2.0 * y, p);
    checks.push_back({"doubling the task doubles the cost", rel(scaled.cost, fresh.cost) <= 1e-7,
                      format_number(scaled.cost) + " vs " + format_number(fresh.cost)});
  }

  const GaResult g = ga(t, y, p, s.ga);
  checks.push_back({"ga never beats the optimum", g.solution.cost >= best - 1e-9 * best,
                    format_number(g.solution.cost)});
  bool monotone = true;
  for (std::size_t k = 1; k < g.best_cost_per_generation.size(); ++k) {
    monotone = monotone && g.best_cost_per_generation[k] <= g.best_cost_per_generation[k - 1];
  }
  checks.push_back({"ga best cost never increases", monotone, ""});
  return checks;
}

}  // namespace offload::harness
