#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "offload/cost_model.hpp"
#include "offload/exact_solvers.hpp"
#include "offload/network.hpp"
#include "offload/rng.hpp"

namespace offload {

struct NpParams {
  double theta_p = 0.0;
};

struct LpParams {
  std::size_t xi = 0;
};

enum class MutationOperator {
  swap,     // transpose two positions of one subtree sequence
  shuffle,  // reshuffle one subtree sequence entirely
};

struct GaParams {
  std::size_t population = 4;
  std::size_t generations = 100;
  double elite_frac = 0.2;
  double mutation_prob = 0.05;
  std::uint64_t rng_seed = 0;
  MutationOperator mutation = MutationOperator::swap;
};

void validate(const NpParams& p);
void validate(const GaParams& p);

/// Cost of processing everything at the master.
double local_cost(const SinkTree& t, double task_size, const CostParams& p);

/// Optimal cost when only the master and node i may carry workload.
double partial_offload_cost(const SinkTree& t, NodeId i, double task_size, const CostParams& p);

struct NodePruneResult {
  PrunedTree pruned;
  double local_cost = 0.0;
  std::vector<double> partial_cost;  // per tree id of the input; [0] = local_cost
  std::set<NodeId> selected;         // tree ids of the input tree
};

NodePruneResult node_prune(const SinkTree& t, const NpParams& np, double task_size,
                           const CostParams& p);

/// Keeps the master and levels 1..xi.
PrunedTree level_prune(const SinkTree& t, const LpParams& lp);

/// Maps a solution on a pruned tree back onto the tree it was pruned from.
/// Removed nodes get zero workload and are sent first in their subtree, so
/// they neither wait nor delay anyone.
Solution lift_solution(const SinkTree& full, const SinkTree& pruned, const Solution& s,
                       const CostParams& p);

/// OX1 on one sequence: a slice of `a` is kept in place, the rest is filled
/// in the order the remaining elements appear in `b` after the slice.
std::vector<NodeId> ordered_crossover(const std::vector<NodeId>& a, const std::vector<NodeId>& b,
                                      Rng& rng);
Schedule ordered_crossover(const Schedule& a, const Schedule& b, Rng& rng);

void mutate(Schedule& s, MutationOperator op, Rng& rng);

struct GaResult {
  Solution solution;
  /// Best-ever cost after generation 0, 1, ..., G.
  std::vector<double> best_cost_per_generation;
};

GaResult ga(const SinkTree& t, double task_size, const CostParams& p, const GaParams& g,
            const std::set<NodeId>& forced_zero = {});

Solution baseline_local(const SinkTree& t, double task_size, const CostParams& p);
/// Best two-party split with one one-hop neighbour, chosen by completion time.
Solution baseline_partial(const SinkTree& t, double task_size, const CostParams& p);
/// Master plus all one-hop neighbours, split by completion time.
Solution baseline_master_worker(const SinkTree& t, double task_size, const CostParams& p);
/// Whole task to the single node with the lowest full-offload cost.
Solution baseline_multi_hop(const SinkTree& t, double task_size, const CostParams& p);

}  // namespace offload
