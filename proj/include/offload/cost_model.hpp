#pragma once

#include <set>
#include <vector>

#include "offload/network.hpp"
#include "offload/units.hpp"

namespace offload {

/// w1 weighs seconds, w2 weighs joules.
struct Weights {
  double time = 1.0;
  double energy = 0.0;

  bool operator==(const Weights&) const = default;
};

void validate(const Weights& w);

struct CostParams {
  Weights weights;
  double cycles_per_bit = units::kDefaultCyclesPerBit;
};

void validate(const CostParams& p);

/// Per-node workload in bits, indexed by tree id.
struct Allocation {
  std::vector<double> y;
  double total = 0.0;
};

/// Absolute tolerance used for the sum-to-total check: 1e-6 * Y.
inline constexpr double kAllocationTolerance = 1e-6;

/// Throws ContractError when sizes, signs, the total, or forced zeros are off.
void validate(const SinkTree& t, const Allocation& a, const std::set<NodeId>& forced_zero = {});

/// For each subtree t (in SinkTree::subtrees() order) the transmission order
/// of A_t, earliest first.
struct Schedule {
  std::vector<std::vector<NodeId>> sequences;

  /// Every subtree sent in ascending tree-id order.
  static Schedule in_tree_order(const SinkTree& t);

  bool operator==(const Schedule&) const = default;
  auto operator<=>(const Schedule&) const = default;
};

/// Throws ContractError unless every sequence is a permutation of its A_t.
void validate(const SinkTree& t, const Schedule& s);

/// Position of each node within its subtree sequence (0 = first). The
/// master gets 0.
std::vector<std::size_t> schedule_ranks(const SinkTree& t, const Schedule& s);

struct NodeCost {
  double t_tran = 0.0;
  double t_wait = 0.0;
  double t_comp = 0.0;
  double t_total = 0.0;
  double e_comp = 0.0;
  double e_comm = 0.0;
  double e_total = 0.0;
  double cost = 0.0;  // J_i
};

struct CostBreakdown {
  std::vector<NodeCost> nodes;
  double system_cost = 0.0;  // J = max_i J_i

  double max_total_time() const;
  double max_total_energy() const;
};

/// J_i(y) = sum_k a(i, k) * y_k for a fixed tree and schedule.
class CostCoefficients {
 public:
  CostCoefficients() = default;
  CostCoefficients(std::size_t n, double cycles_per_bit)
      : n_(n), cycles_per_bit_(cycles_per_bit), a_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double cycles_per_bit() const { return cycles_per_bit_; }
  double operator()(std::size_t i, std::size_t k) const { return a_[i * n_ + k]; }
  double& operator()(std::size_t i, std::size_t k) { return a_[i * n_ + k]; }

  /// The vector of J_i for allocation y.
  std::vector<double> evaluate(const std::vector<double>& y) const;

 private:
  std::size_t n_ = 0;
  double cycles_per_bit_ = 0.0;
  std::vector<double> a_;
};

double transmission_time(const SinkTree& t, NodeId i, double y_i);

double waiting_time(const SinkTree& t, const Schedule& s, const Allocation& a, NodeId i);

double compute_time(const ServerParams& srv, double y, double cycles_per_bit);

double compute_energy(const ServerParams& srv, double y, double cycles_per_bit);

/// Bits node i forwards to its child j: the whole workload of j's subtree.
double relay_load(const SinkTree& t, const Allocation& a, NodeId i, NodeId j);

double node_energy(const SinkTree& t, const Allocation& a, NodeId i, double cycles_per_bit);

double node_cost(const SinkTree& t, const Schedule& s, const Allocation& a, const CostParams& p,
                 NodeId i);

CostBreakdown system_cost(const SinkTree& t, const Schedule& s, const Allocation& a,
                          const CostParams& p);

CostCoefficients cost_coefficients(const SinkTree& t, const Schedule& s, const CostParams& p);

}  // namespace offload
