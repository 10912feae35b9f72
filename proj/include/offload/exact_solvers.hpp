#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "offload/cost_model.hpp"
#include "offload/network.hpp"

namespace offload {

struct SolveStats {
  std::uint64_t schedules_evaluated = 0;
  std::uint64_t lp_solves = 0;
};

struct Solution {
  Allocation allocation;
  Schedule schedule;
  double cost = 0.0;  // z
  CostBreakdown breakdown;
  std::string solver_tag;
  double base_task_size = 0.0;  // Y the solution was computed for
  SolveStats stats;
};

/// Min-max allocation LP for one fixed schedule. Y in bits.
Solution solve_fixed_order(const SinkTree& t, const Schedule& s, double task_size,
                           const CostParams& p, const std::set<NodeId>& forced_zero = {});

/// Random access over every per-subtree permutation tuple of a tree, in a
/// fixed order: the last subtree varies fastest, each subtree's
/// permutations in lexicographic order of tree ids.
class ScheduleEnumerator {
 public:
  explicit ScheduleEnumerator(const SinkTree& t);

  /// prod_t |A_t|!. Throws ParameterError if it exceeds 2^64 - 1.
  std::uint64_t count() const { return count_; }
  Schedule at(std::uint64_t index) const;

  template <class Fn>
  void for_each(Fn&& fn) const {
    for (std::uint64_t k = 0; k < count_; ++k) fn(k, at(k));
  }

 private:
  std::vector<std::vector<NodeId>> subtrees_;
  std::vector<std::uint64_t> radix_;
  std::uint64_t count_ = 1;
};

std::vector<Schedule> enumerate_schedules(const SinkTree& t);

struct ExactOptions {
  /// Worker threads for schedule enumeration; 0 picks hardware concurrency.
  unsigned threads = 0;
};

/// Exhaustive search over all schedules, solving the allocation LP for each.
Solution cmo(const SinkTree& t, double task_size, const CostParams& p,
             const std::set<NodeId>& forced_zero = {}, const ExactOptions& opt = {});

struct SubtreeSolution {
  std::size_t subtree = 0;
  double probe_load = 0.0;  // Y'_t
  double probe_cost = 0.0;  // max_{i in A_t} J_i at the probe
  std::vector<double> allocation;  // tree ids of the full tree; zero outside A_t
  std::vector<NodeId> sequence;
  SolveStats stats;
};

/// Solves one augmented subtree (master + A_t) and extracts the probe.
using SubtreeSolver = std::function<Solution(const SinkTree& subtree_with_master, double task_size,
                                             const CostParams& p,
                                             const std::set<NodeId>& forced_zero)>;

struct MasterSplit {
  double master = 0.0;               // y_0
  std::vector<double> subtree_load;  // Y_t per subtree
  double cost = 0.0;                 // z of the split problem
};

/// Splits Y between the master and whole subtrees, each subtree's cost being
/// linear in its load with slope probe_cost / probe_load. Subtrees with a
/// zero probe load receive nothing.
MasterSplit solve_master_split(const std::vector<SubtreeSolution>& probes, const SinkTree& t,
                               double task_size, const CostParams& p, bool master_allowed = true);

/// Subtree decomposition: probe every subtree in parallel, split the load,
/// rescale. `subtree_solver` defaults to cmo.
Solution pmo(const SinkTree& t, double task_size, const CostParams& p,
             const std::set<NodeId>& forced_zero = {}, SubtreeSolver subtree_solver = {});

/// Proportional rescaling of an optimal solution to a new task size.
Solution scale_solution(const Solution& base, double new_task_size);

/// Stable hex digest of a tree's structure and parameters.
std::string tree_hash(const SinkTree& t, const CostParams& p);

/// One cached baseline per (tree, weights, b); answers other task sizes by rescaling.
struct CachedBaseline {
  std::string tree_hash;
  double task_size = 0.0;
  CostParams params;
  Solution solution;
  std::uint64_t reuses = 0;  // answers served from this entry since it was solved
};

void save_baseline(const CachedBaseline& c, const std::string& path);
std::optional<CachedBaseline> load_baseline(const std::string& path);

}  // namespace offload
