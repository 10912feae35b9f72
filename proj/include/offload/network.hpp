#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "offload/units.hpp"

namespace offload {

using NodeId = std::size_t;

inline constexpr NodeId kMaster = 0;
inline constexpr NodeId kNoNode = static_cast<NodeId>(-1);

struct ServerParams {
  NodeId id = 0;
  double cpu_freq = 1e9;      // Hz
  double tx_power = 1.0;      // W
  double switched_cap = 0.0;  // J / (cycle * Hz^2)

  bool operator==(const ServerParams&) const = default;
};

void validate(const ServerParams& s);

struct ShannonParams {
  double bandwidth = 0.0;     // Hz
  double signal_power = 0.0;  // W
  double noise_power = 0.0;   // W
};

/// Channel capacity B * log2(1 + s/n), in bits/s.
double shannon_rate(const ShannonParams& p);

using Link = std::pair<NodeId, NodeId>;

/// Directed graph of servers. Server i must carry id i; node 0 is the master.
class NetworkGraph {
 public:
  NetworkGraph() = default;
  explicit NetworkGraph(std::vector<ServerParams> servers);

  void add_link(NodeId from, NodeId to, double rate);
  /// Two directed links with the same rate.
  void add_symmetric_link(NodeId a, NodeId b, double rate);
  void set_rate(NodeId from, NodeId to, double rate);

  std::size_t size() const { return servers_.size(); }
  const std::vector<ServerParams>& servers() const { return servers_; }
  const ServerParams& server(NodeId i) const { return servers_.at(i); }
  ServerParams& server(NodeId i) { return servers_.at(i); }
  const std::map<Link, double>& links() const { return links_; }
  std::optional<double> rate(NodeId from, NodeId to) const;

  /// Original ids not reachable from the master along directed links.
  std::vector<NodeId> unreachable_from_master() const;

  bool operator==(const NetworkGraph&) const = default;

 private:
  std::vector<ServerParams> servers_;
  std::map<Link, double> links_;
};

struct GenParams {
  std::size_t node_count = 1;  // N + 1, master included
  double edge_prob = 0.5;
  std::pair<double, double> freq_range{units::ghz_to_hz(1.0), units::ghz_to_hz(10.0)};
  std::pair<double, double> rate_range{units::gbps_to_bps(10.0), units::gbps_to_bps(100.0)};
  double gamma = 1e-2;
  double tx_power_dbm = 30.0;
  std::uint64_t rng_seed = 0;
};

inline constexpr int kConnectivityRetries = 100;

/// Erdos-Renyi sampling with symmetric link rates; resamples until the
/// master reaches every node.
NetworkGraph generate_network(const GenParams& g);

/// Rooted, BFS-relabelled tree. All indices are tree ids unless a method
/// says otherwise; tree id 0 is the master.
class SinkTree {
 public:
  struct NodeSpec {
    ServerParams server;         // server.id is the original id
    NodeId parent = kNoNode;     // index into the spec list
    double edge_rate = 0.0;      // rate of the edge parent -> node
  };

  SinkTree() = default;

  /// Builds and relabels a tree from an arbitrary node listing. Exactly one
  /// spec must have no parent (the root). Children are ordered by original id.
  static SinkTree from_specs(const std::vector<NodeSpec>& specs);

  std::size_t size() const { return parent_.size(); }
  std::size_t height() const { return levels_.empty() ? 0 : levels_.size() - 1; }

  NodeId parent(NodeId i) const { return parent_.at(i); }
  const std::vector<NodeId>& children(NodeId i) const { return children_.at(i); }
  double edge_rate(NodeId i) const { return edge_rate_.at(i); }
  std::size_t depth(NodeId i) const { return depth_.at(i); }
  const std::vector<std::vector<NodeId>>& levels() const { return levels_; }

  /// Level-1 nodes, in tree-id order (the index t used by schedules).
  const std::vector<NodeId>& subtree_roots() const { return subtree_roots_; }
  /// A_t for every level-1 node t, each sorted by tree id.
  const std::vector<std::vector<NodeId>>& subtrees() const { return subtrees_; }
  /// Index into subtrees() for a non-root node.
  std::size_t subtree_index(NodeId i) const { return subtree_of_.at(i); }

  const ServerParams& server(NodeId i) const { return servers_.at(i); }
  NodeId original_id(NodeId i) const { return servers_.at(i).id; }
  std::optional<NodeId> tree_id(NodeId original) const;

  /// Nodes from the root to i inclusive.
  std::vector<NodeId> path(NodeId i) const;
  /// Sum of 1/R over the edges from the root to i (seconds per bit).
  double path_inverse_rate(NodeId i) const { return path_inv_rate_.at(i); }
  NodeId lowest_common_ancestor(NodeId a, NodeId b) const;
  bool is_ancestor(NodeId ancestor, NodeId node) const;
  /// Child of `ancestor` on the path towards `node`.
  NodeId child_towards(NodeId ancestor, NodeId node) const;
  /// Node plus all its descendants, ascending.
  std::vector<NodeId> subtree_nodes(NodeId i) const;

  std::vector<NodeSpec> specs() const;

  bool operator==(const SinkTree&) const = default;

 private:
  std::vector<ServerParams> servers_;
  std::vector<NodeId> parent_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<double> edge_rate_;
  std::vector<std::size_t> depth_;
  std::vector<double> path_inv_rate_;
  std::vector<std::vector<NodeId>> levels_;
  std::vector<NodeId> subtree_roots_;
  std::vector<std::vector<NodeId>> subtrees_;
  std::vector<std::size_t> subtree_of_;
  std::map<NodeId, NodeId> orig_to_tree_;
};

/// Minimum sum-of-1/R paths from the master. Ties prefer fewer hops, then
/// the smaller predecessor original id.
SinkTree build_sink_tree(const NetworkGraph& g);

enum class PruneMode {
  keep_relays,     // removed interior nodes stay as zero-workload relays
  remove_subtree,  // removing a node removes everything under it
};

struct PrunedTree {
  SinkTree tree;
  std::set<NodeId> forced_zero;  // tree ids in `tree`
};

/// `remove` and `forced_zero` are tree ids of `t`. Existing forced-zero marks
/// are carried over for nodes that survive.
PrunedTree prune_tree(const SinkTree& t, const std::set<NodeId>& remove,
                      PruneMode mode = PruneMode::keep_relays,
                      const std::set<NodeId>& forced_zero = {});

/// The master together with the t-th subtree, plus the map from its tree
/// ids back to tree ids of `t`.
struct SubtreeView {
  SinkTree tree;
  std::vector<NodeId> to_parent;
};
SubtreeView extract_subtree(const SinkTree& t, std::size_t subtree);

}  // namespace offload
