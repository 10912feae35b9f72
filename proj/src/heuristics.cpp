#include "offload/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "offload/errors.hpp"

namespace offload {

void validate(const NpParams& p) {
  if (!(p.theta_p >= 0.0 && p.theta_p <= 1.0)) throw ParameterError("theta_p must be in [0, 1]");
}

void validate(const GaParams& p) {
  if (p.population < 2) throw ParameterError("GA population must be >= 2");
  if (p.generations < 1) throw ParameterError("GA generations must be >= 1");
  if (!(p.elite_frac >= 0.0 && p.elite_frac <= 1.0)) {
    throw ParameterError("GA elite fraction must be in [0, 1]");
  }
  if (!(p.mutation_prob >= 0.0 && p.mutation_prob <= 1.0)) {
    throw ParameterError("GA mutation probability must be in [0, 1]");
  }
}

namespace {

std::set<NodeId> all_but(const SinkTree& t, std::initializer_list<NodeId> keep) {
  std::set<NodeId> out;
  for (NodeId i = 0; i < t.size(); ++i) {
    if (std::find(keep.begin(), keep.end(), i) == keep.end()) out.insert(i);
  }
  return out;
}

CostParams time_only(const CostParams& p) {
  CostParams q = p;
  q.weights = {1.0, 0.0};
  return q;
}

// Full-tree evaluation of a fixed allocation, in tree order.
Solution evaluate(const SinkTree& t, std::vector<double> y, double task_size, const CostParams& p,
                  std::string tag) {
  Solution s;
  s.allocation = {std::move(y), task_size};
  s.schedule = Schedule::in_tree_order(t);
  s.breakdown = system_cost(t, s.schedule, s.allocation, p);
  s.cost = s.breakdown.system_cost;
  s.solver_tag = std::move(tag);
  s.base_task_size = task_size;
  return s;
}

}  // namespace

double local_cost(const SinkTree& t, double task_size, const CostParams& p) {
  return baseline_local(t, task_size, p).cost;
}

double partial_offload_cost(const SinkTree& t, NodeId i, double task_size, const CostParams& p) {
  if (i == kMaster) throw ParameterError("partial offloading needs a node other than the master");
  if (i >= t.size()) throw ParameterError("node " + std::to_string(i) + " not in tree");
  return solve_fixed_order(t, Schedule::in_tree_order(t), task_size, p, all_but(t, {kMaster, i}))
      .cost;
}

NodePruneResult node_prune(const SinkTree& t, const NpParams& np, double task_size,
                           const CostParams& p) {
  validate(np);
  NodePruneResult out;
  out.local_cost = local_cost(t, task_size, p);
  out.partial_cost.assign(t.size(), out.local_cost);
  std::set<NodeId> remove;
  for (NodeId i = 1; i < t.size(); ++i) {
    out.partial_cost[i] = partial_offload_cost(t, i, task_size, p);
    const double reduction =
        out.local_cost > 0.0 ? (out.local_cost - out.partial_cost[i]) / out.local_cost : 0.0;
    if (reduction > np.theta_p) {
      out.selected.insert(i);
    } else {
      remove.insert(i);
    }
  }
  out.pruned = prune_tree(t, remove, PruneMode::keep_relays);
  return out;
}

PrunedTree level_prune(const SinkTree& t, const LpParams& lp) {
  if (lp.xi > t.height()) {
    throw ParameterError("xi = " + std::to_string(lp.xi) + " exceeds the tree height " +
                         std::to_string(t.height()));
  }
  std::set<NodeId> remove;
  for (NodeId i = 1; i < t.size(); ++i) {
    if (t.depth(i) > lp.xi) remove.insert(i);
  }
  return prune_tree(t, remove, PruneMode::remove_subtree);
}

Solution lift_solution(const SinkTree& full, const SinkTree& pruned, const Solution& s,
                       const CostParams& p) {
  std::vector<double> y(full.size(), 0.0);
  std::vector<bool> present(full.size(), false);
  for (NodeId i = 0; i < pruned.size(); ++i) {
    const NodeId f = *full.tree_id(pruned.original_id(i));
    y[f] = s.allocation.y.at(i);
    present[f] = true;
  }
  Schedule schedule;
  schedule.sequences.resize(full.subtrees().size());
  for (std::size_t k = 0; k < full.subtrees().size(); ++k) {
    for (NodeId i : full.subtrees()[k]) {
      if (!present[i]) schedule.sequences[k].push_back(i);
    }
  }
  for (const auto& seq : s.schedule.sequences) {
    for (NodeId i : seq) {
      const NodeId f = *full.tree_id(pruned.original_id(i));
      schedule.sequences[full.subtree_index(f)].push_back(f);
    }
  }
  Solution out = s;
  out.allocation = {std::move(y), s.allocation.total};
  out.schedule = std::move(schedule);
  out.breakdown = system_cost(full, out.schedule, out.allocation, p);
  out.cost = out.breakdown.system_cost;
  return out;
}

// ---------------------------------------------------------------------------
// GA

std::vector<NodeId> ordered_crossover(const std::vector<NodeId>& a, const std::vector<NodeId>& b,
                                      Rng& rng) {
  const std::size_t n = a.size();
  if (b.size() != n) throw ContractError("ordered_crossover: parents differ in length");
  if (n < 2) return a;
  std::size_t lo = rng.index(n);
  std::size_t hi = rng.index(n);
  if (lo > hi) std::swap(lo, hi);

  std::vector<NodeId> child(n);
  std::set<NodeId> taken;
  for (std::size_t k = lo; k <= hi; ++k) {
    child[k] = a[k];
    taken.insert(a[k]);
  }
  std::size_t write = (hi + 1) % n;
  for (std::size_t step = 0; step < n; ++step) {
    const NodeId gene = b[(hi + 1 + step) % n];
    if (taken.contains(gene)) continue;
    child[write] = gene;
    write = (write + 1) % n;
  }
  return child;
}

Schedule ordered_crossover(const Schedule& a, const Schedule& b, Rng& rng) {
  if (a.sequences.size() != b.sequences.size()) {
    throw ContractError("ordered_crossover: schedules differ in subtree count");
  }
  Schedule child;
  child.sequences.reserve(a.sequences.size());
  for (std::size_t k = 0; k < a.sequences.size(); ++k) {
    child.sequences.push_back(ordered_crossover(a.sequences[k], b.sequences[k], rng));
  }
  return child;
}

void mutate(Schedule& s, MutationOperator op, Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t k = 0; k < s.sequences.size(); ++k) {
    if (s.sequences[k].size() >= 2) candidates.push_back(k);
  }
  if (candidates.empty()) return;
  std::vector<NodeId>& seq = s.sequences[candidates[rng.index(candidates.size())]];
  if (op == MutationOperator::shuffle) {
    rng.shuffle(seq);
    return;
  }
  const std::size_t i = rng.index(seq.size());
  std::size_t j = rng.index(seq.size() - 1);
  if (j >= i) ++j;
  std::swap(seq[i], seq[j]);
}

GaResult ga(const SinkTree& t, double task_size, const CostParams& p, const GaParams& g,
            const std::set<NodeId>& forced_zero) {
  validate(g);
  Rng rng(g.rng_seed);

  std::map<Schedule, double> fitness;
  std::uint64_t lp_solves = 0;
  auto cost_of = [&](const Schedule& s) {
    auto it = fitness.find(s);
    if (it == fitness.end()) {
      it = fitness.emplace(s, solve_fixed_order(t, s, task_size, p, forced_zero).cost).first;
      ++lp_solves;
    }
    return it->second;
  };

  std::vector<Schedule> population;
  population.reserve(g.population);
  for (std::size_t k = 0; k < g.population; ++k) {
    Schedule s = Schedule::in_tree_order(t);
    for (auto& seq : s.sequences) rng.shuffle(seq);
    population.push_back(std::move(s));
  }

  const std::size_t elites = std::min(
      g.population,
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(g.elite_frac * g.population))));

  GaResult out;
  Schedule best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> costs;

  // Ranks the population by cost (then schedule, for determinism) and
  // updates the best-ever record.
  auto rank = [&] {
    costs.resize(population.size());
    for (std::size_t k = 0; k < population.size(); ++k) costs[k] = cost_of(population[k]);
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (costs[a] != costs[b]) return costs[a] < costs[b];
      return population[a] < population[b];
    });
    std::vector<Schedule> sorted;
    std::vector<double> sorted_costs;
    for (std::size_t k : order) {
      sorted.push_back(population[k]);
      sorted_costs.push_back(costs[k]);
    }
    population = std::move(sorted);
    costs = std::move(sorted_costs);
    if (costs.front() < best_cost) {
      best_cost = costs.front();
      best = population.front();
    }
    out.best_cost_per_generation.push_back(best_cost);
  };

  auto select = [&]() -> const Schedule& {
    for (std::size_t k = 0; k < costs.size(); ++k) {
      if (costs[k] == 0.0) return population[k];
    }
    double total = 0.0;
    for (double c : costs) total += 1.0 / c;
    double r = rng.uniform() * total;
    for (std::size_t k = 0; k < costs.size(); ++k) {
      r -= 1.0 / costs[k];
      if (r < 0.0) return population[k];
    }
    return population.back();
  };

  rank();
  for (std::size_t gen = 0; gen < g.generations; ++gen) {
    std::vector<Schedule> next(population.begin(),
                               population.begin() + static_cast<std::ptrdiff_t>(elites));
    while (next.size() < g.population) {
      const Schedule& a = select();
      const Schedule& b = select();
      Schedule child = ordered_crossover(a, b, rng);
      if (rng.bernoulli(g.mutation_prob)) mutate(child, g.mutation, rng);
      next.push_back(std::move(child));
    }
    population = std::move(next);
    rank();
  }

  out.solution = solve_fixed_order(t, best, task_size, p, forced_zero);
  out.solution.solver_tag = "ga";
  out.solution.stats = {fitness.size(), lp_solves + 1};
  return out;
}

// ---------------------------------------------------------------------------
// Baselines

Solution baseline_local(const SinkTree& t, double task_size, const CostParams& p) {
  validate(p);
  if (!(task_size >= 0.0)) throw ParameterError("task size must be >= 0");
  std::vector<double> y(t.size(), 0.0);
  y[kMaster] = task_size;
  return evaluate(t, std::move(y), task_size, p, "local");
}

Solution baseline_partial(const SinkTree& t, double task_size, const CostParams& p) {
  const std::vector<NodeId>& neighbours = t.subtree_roots();
  if (neighbours.empty() || task_size == 0.0) {
    Solution s = baseline_local(t, task_size, p);
    s.solver_tag = "partial";
    return s;
  }
  const CostParams tp = time_only(p);
  const Schedule order = Schedule::in_tree_order(t);
  std::vector<double> best_y;
  double best_time = std::numeric_limits<double>::infinity();
  for (NodeId j : neighbours) {
    Solution s = solve_fixed_order(t, order, task_size, tp, all_but(t, {kMaster, j}));
    if (s.cost < best_time) {
      best_time = s.cost;
      best_y = std::move(s.allocation.y);
    }
  }
  return evaluate(t, std::move(best_y), task_size, p, "partial");
}

Solution baseline_master_worker(const SinkTree& t, double task_size, const CostParams& p) {
  std::set<NodeId> forced;
  for (NodeId i = 1; i < t.size(); ++i) {
    if (t.depth(i) > 1) forced.insert(i);
  }
  Solution s = solve_fixed_order(t, Schedule::in_tree_order(t), task_size, time_only(p), forced);
  return evaluate(t, std::move(s.allocation.y), task_size, p, "master-worker");
}

Solution baseline_multi_hop(const SinkTree& t, double task_size, const CostParams& p) {
  if (t.size() == 1) {
    Solution s = baseline_local(t, task_size, p);
    s.solver_tag = "multi-hop";
    return s;
  }
  Solution best;
  best.cost = std::numeric_limits<double>::infinity();
  for (NodeId i = 1; i < t.size(); ++i) {
    std::vector<double> y(t.size(), 0.0);
    y[i] = task_size;
    Solution s = evaluate(t, std::move(y), task_size, p, "multi-hop");
    if (s.cost < best.cost) best = std::move(s);
  }
  return best;
}

}  // namespace offload
