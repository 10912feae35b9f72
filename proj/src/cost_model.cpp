#include "offload/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "offload/errors.hpp"

namespace offload {

void validate(const Weights& w) {
  if (!(w.time >= 0.0) || !(w.energy >= 0.0) || !(w.time + w.energy > 0.0)) {
    throw ParameterError("weights must be >= 0 with a positive sum");
  }
}

void validate(const CostParams& p) {
  validate(p.weights);
  if (!(p.cycles_per_bit >= 0.0) || !std::isfinite(p.cycles_per_bit)) {
    throw ParameterError("cycles_per_bit must be >= 0");
  }
}

void validate(const SinkTree& t, const Allocation& a, const std::set<NodeId>& forced_zero) {
  if (a.y.size() != t.size()) throw ContractError("allocation size does not match the tree");
  double sum = 0.0;
  for (NodeId i = 0; i < a.y.size(); ++i) {
    if (!(a.y[i] >= 0.0)) throw ContractError("negative workload on node " + std::to_string(i));
    if (forced_zero.contains(i) && a.y[i] != 0.0) {
      throw ContractError("forced-zero node " + std::to_string(i) + " carries workload");
    }
    sum += a.y[i];
  }
  if (std::abs(sum - a.total) > kAllocationTolerance * a.total) {
    throw ContractError("allocation sums to " + std::to_string(sum) + ", expected " +
                        std::to_string(a.total));
  }
}

Schedule Schedule::in_tree_order(const SinkTree& t) { return Schedule{t.subtrees()}; }

void validate(const SinkTree& t, const Schedule& s) {
  if (s.sequences.size() != t.subtrees().size()) {
    throw ContractError("schedule has " + std::to_string(s.sequences.size()) +
                        " sequences for " + std::to_string(t.subtrees().size()) + " subtrees");
  }
  for (std::size_t k = 0; k < s.sequences.size(); ++k) {
    std::vector<NodeId> sorted = s.sequences[k];
    std::sort(sorted.begin(), sorted.end());
    if (sorted != t.subtrees()[k]) {
      throw ContractError("schedule sequence " + std::to_string(k) +
                          " is not a permutation of its subtree");
    }
  }
}

std::vector<std::size_t> schedule_ranks(const SinkTree& t, const Schedule& s) {
  validate(t, s);
  std::vector<std::size_t> rank(t.size(), 0);
  for (const auto& seq : s.sequences) {
    for (std::size_t p = 0; p < seq.size(); ++p) rank[seq[p]] = p;
  }
  return rank;
}

double CostBreakdown::max_total_time() const {
  double m = 0.0;
  for (const auto& n : nodes) m = std::max(m, n.t_total);
  return m;
}

double CostBreakdown::max_total_energy() const {
  double m = 0.0;
  for (const auto& n : nodes) m = std::max(m, n.e_total);
  return m;
}

std::vector<double> CostCoefficients::evaluate(const std::vector<double>& y) const {
  std::vector<double> j(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n_; ++k) acc += a_[i * n_ + k] * y[k];
    j[i] = acc;
  }
  return j;
}

double transmission_time(const SinkTree& t, NodeId i, double y_i) {
  if (i >= t.size()) throw ContractError("transmission_time: node not in tree");
  if (i == kMaster) return 0.0;
  return y_i * t.path_inverse_rate(i);
}

namespace {

void check_allocation_size(const SinkTree& t, const Allocation& a) {
  if (a.y.size() != t.size()) throw ContractError("allocation size does not match the tree");
}

// Waiting time of `i` given the sequence of its subtree.
double wait_in_sequence(const SinkTree& t, const std::vector<NodeId>& seq,
                        const std::vector<double>& y, NodeId i) {
  double wait = 0.0;
  for (NodeId j : seq) {
    if (j == i) return wait;
    // The shared part of the two root paths ends at their lowest common ancestor.
    wait += y[j] * t.path_inverse_rate(t.lowest_common_ancestor(i, j));
  }
  throw ContractError("schedule does not list node " + std::to_string(i));
}

std::vector<double> subtree_loads(const SinkTree& t, const std::vector<double>& y) {
  std::vector<double> load = y;
  for (NodeId i = t.size(); i-- > 1;) load[t.parent(i)] += load[i];
  return load;
}

}  // namespace

double waiting_time(const SinkTree& t, const Schedule& s, const Allocation& a, NodeId i) {
  if (i >= t.size()) throw ContractError("waiting_time: node not in tree");
  check_allocation_size(t, a);
  if (i == kMaster) return 0.0;
  const std::size_t k = t.subtree_index(i);
  if (k >= s.sequences.size()) {
    throw ContractError("schedule is missing the subtree of node " + std::to_string(i));
  }
  return wait_in_sequence(t, s.sequences[k], a.y, i);
}

double compute_time(const ServerParams& srv, double y, double cycles_per_bit) {
  return y * cycles_per_bit / srv.cpu_freq;
}

double compute_energy(const ServerParams& srv, double y, double cycles_per_bit) {
  return srv.switched_cap * y * cycles_per_bit * srv.cpu_freq * srv.cpu_freq;
}

double relay_load(const SinkTree& t, const Allocation& a, NodeId i, NodeId j) {
  check_allocation_size(t, a);
  if (j >= t.size() || j == kMaster || t.parent(j) != i) {
    throw ContractError("relay_load: node " + std::to_string(j) + " is not a child of " +
                        std::to_string(i));
  }
  double load = 0.0;
  for (NodeId k : t.subtree_nodes(j)) load += a.y[k];
  return load;
}

double node_energy(const SinkTree& t, const Allocation& a, NodeId i, double cycles_per_bit) {
  check_allocation_size(t, a);
  const ServerParams& srv = t.server(i);
  double e = compute_energy(srv, a.y[i], cycles_per_bit);
  for (NodeId c : t.children(i)) e += srv.tx_power * relay_load(t, a, i, c) / t.edge_rate(c);
  return e;
}

double node_cost(const SinkTree& t, const Schedule& s, const Allocation& a, const CostParams& p,
                 NodeId i) {
  const double time = transmission_time(t, i, a.y.at(i)) + waiting_time(t, s, a, i) +
                      compute_time(t.server(i), a.y[i], p.cycles_per_bit);
  return p.weights.time * time + p.weights.energy * node_energy(t, a, i, p.cycles_per_bit);
}

CostBreakdown system_cost(const SinkTree& t, const Schedule& s, const Allocation& a,
                          const CostParams& p) {
  check_allocation_size(t, a);
  validate(t, s);
  const std::vector<double> load = subtree_loads(t, a.y);

  CostBreakdown out;
  out.nodes.resize(t.size());
  for (const auto& seq : s.sequences) {
    for (std::size_t pos = 0; pos < seq.size(); ++pos) {
      const NodeId i = seq[pos];
      double wait = 0.0;
      for (std::size_t q = 0; q < pos; ++q) {
        wait += a.y[seq[q]] * t.path_inverse_rate(t.lowest_common_ancestor(i, seq[q]));
      }
      out.nodes[i].t_wait = wait;
    }
  }
  for (NodeId i = 0; i < t.size(); ++i) {
    NodeCost& c = out.nodes[i];
    const ServerParams& srv = t.server(i);
    c.t_tran = transmission_time(t, i, a.y[i]);
    c.t_comp = compute_time(srv, a.y[i], p.cycles_per_bit);
    c.t_total = c.t_tran + c.t_wait + c.t_comp;
    c.e_comp = compute_energy(srv, a.y[i], p.cycles_per_bit);
    c.e_comm = 0.0;
    for (NodeId ch : t.children(i)) c.e_comm += srv.tx_power * load[ch] / t.edge_rate(ch);
    c.e_total = c.e_comp + c.e_comm;
    c.cost = p.weights.time * c.t_total + p.weights.energy * c.e_total;
    out.system_cost = std::max(out.system_cost, c.cost);
  }
  return out;
}

CostCoefficients cost_coefficients(const SinkTree& t, const Schedule& s, const CostParams& p) {
  validate(t, s);
  const double w1 = p.weights.time;
  const double w2 = p.weights.energy;
  const double b = p.cycles_per_bit;
  CostCoefficients a(t.size(), b);

  for (NodeId i = 0; i < t.size(); ++i) {
    const ServerParams& srv = t.server(i);
    // Own transmission, computation and computation energy.
    a(i, i) += w1 * (t.path_inverse_rate(i) + b / srv.cpu_freq) +
               w2 * srv.switched_cap * b * srv.cpu_freq * srv.cpu_freq;
    // Relay energy: every descendant's bits cross the edge to one child of i.
    for (NodeId c : t.children(i)) {
      const double per_bit = w2 * srv.tx_power / t.edge_rate(c);
      for (NodeId k : t.subtree_nodes(c)) a(i, k) += per_bit;
    }
  }
  // Waiting on earlier transmissions within the same subtree.
  for (const auto& seq : s.sequences) {
    for (std::size_t pos = 0; pos < seq.size(); ++pos) {
      for (std::size_t q = 0; q < pos; ++q) {
        const NodeId i = seq[pos];
        const NodeId j = seq[q];
        a(i, j) += w1 * t.path_inverse_rate(t.lowest_common_ancestor(i, j));
      }
    }
  }
  return a;
}

}  // namespace offload
