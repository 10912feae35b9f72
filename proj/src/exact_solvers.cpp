#include "offload/exact_solvers.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <future>
#include <limits>
#include <thread>

#include "offload/errors.hpp"
#include "offload/json_io.hpp"
#include "offload/lp.hpp"

namespace offload {

namespace {

void check_inputs(const SinkTree& t, double task_size, const CostParams& p,
                  const std::set<NodeId>& forced_zero) {
  validate(p);
  if (!(task_size >= 0.0) || !std::isfinite(task_size)) {
    throw ParameterError("task size must be >= 0");
  }
  for (NodeId i : forced_zero) {
    if (i >= t.size()) throw ParameterError("forced-zero node " + std::to_string(i) + " not in tree");
  }
}

std::vector<bool> allowed_mask(const SinkTree& t, const std::set<NodeId>& forced_zero) {
  std::vector<bool> allowed(t.size(), true);
  for (NodeId i : forced_zero) allowed[i] = false;
  return allowed;
}

struct OrderValue {
  double value = 0.0;
  std::vector<double> y;
  bool free_column = false;
};

OrderValue evaluate_order(const SinkTree& t, const Schedule& s, double task_size,
                          const CostParams& p, const std::vector<bool>& allowed) {
  const CostCoefficients a = cost_coefficients(t, s, p);
  std::vector<double> flat(a.size() * a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t k = 0; k < a.size(); ++k) flat[i * a.size() + k] = a(i, k);
  }
  const lp::MatrixView view{flat, a.size(), a.size()};
  lp::MinMaxResult r = lp::min_max_over_simplex(view, allowed, task_size);
  return {r.value, std::move(r.x), r.free_column};
}

Solution assemble(const SinkTree& t, Schedule s, std::vector<double> y, double task_size,
                  const CostParams& p, std::string tag) {
  Solution sol;
  sol.allocation = {std::move(y), task_size};
  sol.schedule = std::move(s);
  sol.breakdown = system_cost(t, sol.schedule, sol.allocation, p);
  sol.cost = sol.breakdown.system_cost;
  sol.solver_tag = std::move(tag);
  sol.base_task_size = task_size;
  return sol;
}

std::uint64_t factorial(std::size_t n) {
  std::uint64_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) {
    if (f > std::numeric_limits<std::uint64_t>::max() / k) {
      throw ParameterError("schedule count overflows 64 bits");
    }
    f *= k;
  }
  return f;
}

}  // namespace

Solution solve_fixed_order(const SinkTree& t, const Schedule& s, double task_size,
                           const CostParams& p, const std::set<NodeId>& forced_zero) {
  check_inputs(t, task_size, p, forced_zero);
  validate(t, s);
  OrderValue v = evaluate_order(t, s, task_size, p, allowed_mask(t, forced_zero));
  Solution sol = assemble(t, s, std::move(v.y), task_size, p,
                          v.free_column ? "fixed-order+free-node" : "fixed-order");
  sol.stats = {1, 1};
  return sol;
}

// ---------------------------------------------------------------------------
// Schedule enumeration

ScheduleEnumerator::ScheduleEnumerator(const SinkTree& t) : subtrees_(t.subtrees()) {
  for (const auto& a : subtrees_) {
    const std::uint64_t f = factorial(a.size());
    if (count_ > std::numeric_limits<std::uint64_t>::max() / f) {
      throw ParameterError("schedule count overflows 64 bits");
    }
    radix_.push_back(f);
    count_ *= f;
  }
}

Schedule ScheduleEnumerator::at(std::uint64_t index) const {
  if (index >= count_) throw ContractError("schedule index out of range");
  Schedule s;
  s.sequences.resize(subtrees_.size());
  for (std::size_t k = subtrees_.size(); k-- > 0;) {
    std::uint64_t rank = index % radix_[k];
    index /= radix_[k];
    // Lehmer code decode: rank -> lexicographic permutation.
    std::vector<NodeId> pool = subtrees_[k];
    std::vector<NodeId>& out = s.sequences[k];
    out.reserve(pool.size());
    std::uint64_t block = radix_[k];
    for (std::size_t remaining = pool.size(); remaining > 0; --remaining) {
      block /= remaining;
      const std::size_t pick = static_cast<std::size_t>(rank / block);
      rank %= block;
      out.push_back(pool[pick]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  return s;
}

std::vector<Schedule> enumerate_schedules(const SinkTree& t) {
  ScheduleEnumerator e(t);
  std::vector<Schedule> out;
  out.reserve(static_cast<std::size_t>(e.count()));
  e.for_each([&](std::uint64_t, Schedule s) { out.push_back(std::move(s)); });
  return out;
}

// ---------------------------------------------------------------------------
// CMO

Solution cmo(const SinkTree& t, double task_size, const CostParams& p,
             const std::set<NodeId>& forced_zero, const ExactOptions& opt) {
  check_inputs(t, task_size, p, forced_zero);
  const ScheduleEnumerator schedules(t);
  const std::vector<bool> allowed = allowed_mask(t, forced_zero);
  const std::uint64_t count = schedules.count();
  constexpr std::uint64_t kMaxSchedules = 50'000'000;
  if (count > kMaxSchedules) {
    throw ParameterError("cmo: " + std::to_string(count) +
                         " schedules is beyond exhaustive search; use pmo or a heuristic");
  }

  // Pass 1: every schedule's optimal value. Pass 2: the first schedule in
  // enumeration order within kTieTolerance of the minimum. Exact ties differ
  // by rounding noise that depends on Y; the tolerance keeps the choice (and
  // with it the allocation) stable under rescaling and any chunking.
  constexpr double kTieTolerance = 1e-12;
  std::vector<double> values(static_cast<std::size_t>(count));
  auto scan = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t k = begin; k < end; ++k) {
      values[k] = evaluate_order(t, schedules.at(k), task_size, p, allowed).value;
    }
  };

  unsigned threads = opt.threads != 0 ? opt.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, threads);
  constexpr std::uint64_t kMinPerThread = 64;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, (count + kMinPerThread - 1) / kMinPerThread));
  threads = std::max(1u, threads);

  if (threads == 1) {
    scan(0, count);
  } else {
    std::vector<std::future<void>> parts;
    const std::uint64_t chunk = (count + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      const std::uint64_t b = std::min(count, w * chunk);
      const std::uint64_t e = std::min(count, b + chunk);
      parts.push_back(std::async(std::launch::async, scan, b, e));
    }
    for (auto& f : parts) f.get();
  }

  const double lowest = *std::min_element(values.begin(), values.end());
  const auto pick = std::find_if(values.begin(), values.end(), [&](double v) {
    return v <= lowest + kTieTolerance * std::abs(lowest);
  });
  const std::uint64_t index = static_cast<std::uint64_t>(pick - values.begin());
  const Schedule best_schedule = schedules.at(index);
  OrderValue best = evaluate_order(t, best_schedule, task_size, p, allowed);

  Solution sol = assemble(t, best_schedule, std::move(best.y), task_size, p,
                          best.free_column ? "cmo+free-node" : "cmo");
  sol.stats = {count, count + 1};
  return sol;
}

// ---------------------------------------------------------------------------
// PMO

MasterSplit solve_master_split(const std::vector<SubtreeSolution>& probes, const SinkTree& t,
                               double task_size, const CostParams& p, bool master_allowed) {
  validate(p);
  if (!(task_size >= 0.0)) throw ParameterError("task size must be >= 0");
  const std::size_t k = probes.size();
  MasterSplit out;
  out.subtree_load.assign(k, 0.0);
  if (task_size == 0.0) return out;

  const ServerParams& m = t.server(kMaster);
  const double w1 = p.weights.time;
  const double w2 = p.weights.energy;
  const double b = p.cycles_per_bit;

  // Columns: master, then one per subtree. Row 0 is J_0; row t+1 is subtree t.
  const std::size_t n = k + 1;
  std::vector<double> a(n * n, 0.0);
  std::vector<bool> allowed(n, true);
  allowed[0] = master_allowed;
  a[0] = w1 * b / m.cpu_freq + w2 * m.switched_cap * b * m.cpu_freq * m.cpu_freq;
  for (std::size_t s = 0; s < k; ++s) {
    const SubtreeSolution& pr = probes[s];
    const NodeId root = t.subtree_roots().at(pr.subtree);
    a[s + 1] = w2 * m.tx_power / t.edge_rate(root);
    if (pr.probe_load > 0.0) {
      a[(s + 1) * n + (s + 1)] = pr.probe_cost / pr.probe_load;
    } else {
      allowed[s + 1] = false;
    }
  }
  const lp::MinMaxResult r = lp::min_max_over_simplex({a, n, n}, allowed, task_size);
  out.master = r.x[0];
  for (std::size_t s = 0; s < k; ++s) out.subtree_load[s] = r.x[s + 1];
  out.cost = r.value;
  return out;
}

Solution pmo(const SinkTree& t, double task_size, const CostParams& p,
             const std::set<NodeId>& forced_zero, SubtreeSolver subtree_solver) {
  check_inputs(t, task_size, p, forced_zero);
  if (!subtree_solver) {
    subtree_solver = [](const SinkTree& st, double y, const CostParams& cp,
                        const std::set<NodeId>& fz) { return cmo(st, y, cp, fz, {1}); };
  }
  const std::size_t k = t.subtrees().size();
  if (task_size == 0.0 || k == 0) {
    Solution sol = cmo(t, task_size, p, forced_zero);
    sol.solver_tag = "pmo";
    return sol;
  }

  auto probe = [&](std::size_t s) {
    const SubtreeView view = extract_subtree(t, s);
    std::set<NodeId> local_forced;
    for (NodeId i = 0; i < view.tree.size(); ++i) {
      if (forced_zero.contains(view.to_parent[i])) local_forced.insert(i);
    }
    const Solution local = subtree_solver(view.tree, task_size, p, local_forced);
    SubtreeSolution out;
    out.subtree = s;
    out.allocation.assign(t.size(), 0.0);
    for (NodeId i = 1; i < view.tree.size(); ++i) {
      const double y = local.allocation.y[i];
      out.allocation[view.to_parent[i]] = y;
      out.probe_load += y;
      out.probe_cost = std::max(out.probe_cost, local.breakdown.nodes[i].cost);
    }
    for (NodeId i : local.schedule.sequences.at(0)) out.sequence.push_back(view.to_parent[i]);
    out.stats = local.stats;
    return out;
  };

  std::vector<std::future<SubtreeSolution>> futures;
  futures.reserve(k);
  for (std::size_t s = 0; s < k; ++s) futures.push_back(std::async(std::launch::async, probe, s));
  std::vector<SubtreeSolution> probes;
  probes.reserve(k);
  for (auto& f : futures) probes.push_back(f.get());

  const MasterSplit split =
      solve_master_split(probes, t, task_size, p, !forced_zero.contains(kMaster));

  std::vector<double> y(t.size(), 0.0);
  y[kMaster] = split.master;
  Schedule schedule;
  schedule.sequences.resize(k);
  SolveStats stats;
  double subtree_peak = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    const SubtreeSolution& pr = probes[s];
    schedule.sequences[s] = pr.sequence;
    stats.schedules_evaluated += pr.stats.schedules_evaluated;
    stats.lp_solves += pr.stats.lp_solves;
    if (pr.probe_load <= 0.0) continue;
    const double factor = split.subtree_load[s] / pr.probe_load;
    for (NodeId i : t.subtrees()[s]) y[i] = factor * pr.allocation[i];
    subtree_peak = std::max(subtree_peak, factor * pr.probe_cost);
  }
  stats.lp_solves += 1;

  Solution sol = assemble(t, std::move(schedule), std::move(y), task_size, p, "pmo");
  // Master cost at the split, then the max over subtrees and master.
  const double j0 = sol.breakdown.nodes[kMaster].cost;
  sol.cost = std::max(subtree_peak, j0);
  sol.stats = stats;
  return sol;
}

// ---------------------------------------------------------------------------
// Offline-online rescaling

Solution scale_solution(const Solution& base, double new_task_size) {
  if (!(new_task_size >= 0.0) || !std::isfinite(new_task_size)) {
    throw ParameterError("scale_solution: task size must be >= 0");
  }
  if (!(base.base_task_size > 0.0)) {
    throw ParameterError("scale_solution: base solution has no positive task size");
  }
  const double f = new_task_size / base.base_task_size;
  Solution out = base;
  for (double& y : out.allocation.y) y *= f;
  out.allocation.total = new_task_size;
  out.cost *= f;
  for (NodeCost& c : out.breakdown.nodes) {
    c.t_tran *= f;
    c.t_wait *= f;
    c.t_comp *= f;
    c.t_total *= f;
    c.e_comp *= f;
    c.e_comm *= f;
    c.e_total *= f;
    c.cost *= f;
  }
  out.breakdown.system_cost *= f;
  out.base_task_size = new_task_size;
  out.solver_tag = base.solver_tag + "+scaled";
  out.stats = {};
  return out;
}

std::string tree_hash(const SinkTree& t, const CostParams& p) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ull;
    }
  };
  auto mix_u64 = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      const unsigned char byte = static_cast<unsigned char>(v >> (8 * b));
      mix(&byte, 1);
    }
  };
  auto mix_double = [&](double d) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof d);
    std::memcpy(&bits, &d, sizeof d);
    mix_u64(bits);
  };
  mix_u64(t.size());
  for (NodeId i = 0; i < t.size(); ++i) {
    const ServerParams& s = t.server(i);
    mix_u64(s.id);
    mix_u64(i == kMaster ? ~0ull : t.original_id(t.parent(i)));
    mix_double(t.edge_rate(i));
    mix_double(s.cpu_freq);
    mix_double(s.tx_power);
    mix_double(s.switched_cap);
  }
  mix_double(p.weights.time);
  mix_double(p.weights.energy);
  mix_double(p.cycles_per_bit);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

void save_baseline(const CachedBaseline& c, const std::string& path) {
  json_io::json j;
  j["tree_hash"] = c.tree_hash;
  j["task_size_bits"] = c.task_size;
  j["weights"] = json_io::to_json(c.params.weights);
  j["cycles_per_bit"] = c.params.cycles_per_bit;
  j["solution"] = json_io::to_json(c.solution);
  j["reuses"] = c.reuses;
  json_io::write_file(j, path);
}

std::optional<CachedBaseline> load_baseline(const std::string& path) {
  json_io::json j;
  try {
    j = json_io::read_file(path);
  } catch (const Error&) {
    return std::nullopt;
  }
  CachedBaseline c;
  c.tree_hash = j.at("tree_hash").get<std::string>();
  c.task_size = j.at("task_size_bits").get<double>();
  c.params.weights = json_io::weights_from_json(j.at("weights"));
  c.params.cycles_per_bit = j.at("cycles_per_bit").get<double>();
  c.solution = json_io::solution_from_json(j.at("solution"));
  c.reuses = j.value("reuses", std::uint64_t{0});
  return c;
}

}  // namespace offload
