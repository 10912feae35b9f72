#include "offload/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>
#include <string>
#include <tuple>

#include "offload/errors.hpp"
#include "offload/rng.hpp"

namespace offload {

void validate(const ServerParams& s) {
  if (!(s.cpu_freq > 0.0) || !std::isfinite(s.cpu_freq)) {
    throw ParameterError("server " + std::to_string(s.id) + ": cpu_freq must be > 0");
  }
  if (!(s.tx_power >= 0.0) || !std::isfinite(s.tx_power)) {
    throw ParameterError("server " + std::to_string(s.id) + ": tx_power must be >= 0");
  }
  if (!(s.switched_cap >= 0.0) || !std::isfinite(s.switched_cap)) {
    throw ParameterError("server " + std::to_string(s.id) + ": switched_cap must be >= 0");
  }
}

double shannon_rate(const ShannonParams& p) {
  if (!(p.bandwidth > 0.0)) throw ParameterError("shannon_rate: bandwidth must be > 0");
  if (!(p.noise_power > 0.0)) throw ParameterError("shannon_rate: noise power must be > 0");
  if (!(p.signal_power >= 0.0)) throw ParameterError("shannon_rate: signal power must be >= 0");
  return p.bandwidth * std::log2(1.0 + p.signal_power / p.noise_power);
}

// ---------------------------------------------------------------------------
// NetworkGraph

NetworkGraph::NetworkGraph(std::vector<ServerParams> servers) : servers_(std::move(servers)) {
  for (std::size_t i = 0; i < servers_.size(); ++i) {
    if (servers_[i].id != i) {
      throw ParameterError("server at position " + std::to_string(i) + " has id " +
                           std::to_string(servers_[i].id));
    }
    validate(servers_[i]);
  }
}

void NetworkGraph::add_link(NodeId from, NodeId to, double rate) {
  if (from >= size() || to >= size()) throw ParameterError("link references an unknown server");
  if (from == to) throw ParameterError("self-link on server " + std::to_string(from));
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ParameterError("link " + std::to_string(from) + "->" + std::to_string(to) +
                         ": rate must be > 0");
  }
  links_[{from, to}] = rate;
}

void NetworkGraph::add_symmetric_link(NodeId a, NodeId b, double rate) {
  add_link(a, b, rate);
  add_link(b, a, rate);
}

void NetworkGraph::set_rate(NodeId from, NodeId to, double rate) {
  if (!links_.contains({from, to})) {
    throw ParameterError("no link " + std::to_string(from) + "->" + std::to_string(to));
  }
  add_link(from, to, rate);
}

std::optional<double> NetworkGraph::rate(NodeId from, NodeId to) const {
  auto it = links_.find({from, to});
  if (it == links_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> NetworkGraph::unreachable_from_master() const {
  if (servers_.empty()) return {};
  std::vector<std::vector<NodeId>> adj(size());
  for (const auto& [link, rate] : links_) adj[link.first].push_back(link.second);
  std::vector<bool> seen(size(), false);
  std::deque<NodeId> queue{kMaster};
  seen[kMaster] = true;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  std::vector<NodeId> out;
  for (NodeId i = 0; i < size(); ++i) {
    if (!seen[i]) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

void check(const GenParams& g) {
  if (g.node_count < 1) throw ParameterError("node_count must be >= 1");
  if (!(g.edge_prob > 0.0 && g.edge_prob <= 1.0)) {
    throw ParameterError("edge_prob must lie in (0, 1]");
  }
  auto range_ok = [](const std::pair<double, double>& r) {
    return r.first > 0.0 && r.second >= r.first && std::isfinite(r.second);
  };
  if (!range_ok(g.freq_range)) throw ParameterError("freq_range must be positive and ordered");
  if (!range_ok(g.rate_range)) throw ParameterError("rate_range must be positive and ordered");
  if (!(g.gamma >= 0.0)) throw ParameterError("gamma must be >= 0");
  if (!std::isfinite(g.tx_power_dbm)) throw ParameterError("tx_power_dbm must be finite");
}

}  // namespace

NetworkGraph generate_network(const GenParams& g) {
  check(g);
  Rng rng(g.rng_seed);
  const double tx_power = units::dbm_to_watts(g.tx_power_dbm);
  for (int attempt = 0; attempt < kConnectivityRetries; ++attempt) {
    std::vector<ServerParams> servers(g.node_count);
    for (NodeId i = 0; i < g.node_count; ++i) {
      servers[i] = {i, rng.uniform(g.freq_range.first, g.freq_range.second), tx_power, g.gamma};
    }
    NetworkGraph graph(std::move(servers));
    for (NodeId i = 0; i < g.node_count; ++i) {
      for (NodeId j = i + 1; j < g.node_count; ++j) {
        // Draw the rate unconditionally so the stream layout does not depend
        // on which edges were kept.
        const bool connect = rng.bernoulli(g.edge_prob);
        const double rate = rng.uniform(g.rate_range.first, g.rate_range.second);
        if (connect) graph.add_symmetric_link(i, j, rate);
      }
    }
    if (graph.unreachable_from_master().empty()) return graph;
  }
  throw GenerationError("seed " + std::to_string(g.rng_seed) + ": graph not connected after " +
                        std::to_string(kConnectivityRetries) + " resamples");
}

// ---------------------------------------------------------------------------
// SinkTree

SinkTree SinkTree::from_specs(const std::vector<NodeSpec>& specs) {
  const std::size_t n = specs.size();
  if (n == 0) throw ContractError("sink tree needs at least the master");

  NodeId root = kNoNode;
  std::vector<std::vector<NodeId>> kids(n);
  for (NodeId i = 0; i < n; ++i) {
    validate(specs[i].server);
    if (specs[i].parent == kNoNode) {
      if (root != kNoNode) throw ContractError("sink tree has more than one root");
      root = i;
      continue;
    }
    if (specs[i].parent >= n) throw ContractError("sink tree parent index out of range");
    if (!(specs[i].edge_rate > 0.0)) throw ContractError("sink tree edge rate must be > 0");
    kids[specs[i].parent].push_back(i);
  }
  if (root == kNoNode) throw ContractError("sink tree has no root");
  for (auto& k : kids) {
    std::sort(k.begin(), k.end(), [&](NodeId a, NodeId b) {
      return specs[a].server.id < specs[b].server.id;
    });
  }

  // BFS visit order is the relabelling: level by level, left to right.
  std::vector<NodeId> order;
  std::vector<NodeId> new_id(n, kNoNode);
  order.reserve(n);
  order.push_back(root);
  new_id[root] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (NodeId c : kids[order[head]]) {
      if (new_id[c] != kNoNode) throw ContractError("sink tree contains a cycle");
      new_id[c] = order.size();
      order.push_back(c);
    }
  }
  if (order.size() != n) throw ContractError("sink tree is not connected");

  SinkTree t;
  t.servers_.resize(n);
  t.parent_.assign(n, kNoNode);
  t.children_.assign(n, {});
  t.edge_rate_.assign(n, 0.0);
  t.depth_.assign(n, 0);
  t.path_inv_rate_.assign(n, 0.0);
  t.subtree_of_.assign(n, static_cast<std::size_t>(-1));

  for (NodeId tid = 0; tid < n; ++tid) {
    const NodeSpec& s = specs[order[tid]];
    t.servers_[tid] = s.server;
    if (!t.orig_to_tree_.emplace(s.server.id, tid).second) {
      throw ContractError("duplicate original id " + std::to_string(s.server.id));
    }
    if (tid == 0) continue;
    const NodeId p = new_id[s.parent];
    t.parent_[tid] = p;
    t.children_[p].push_back(tid);
    t.edge_rate_[tid] = s.edge_rate;
    t.depth_[tid] = t.depth_[p] + 1;
    t.path_inv_rate_[tid] = t.path_inv_rate_[p] + 1.0 / s.edge_rate;
  }

  for (NodeId tid = 0; tid < n; ++tid) {
    if (t.depth_[tid] >= t.levels_.size()) t.levels_.resize(t.depth_[tid] + 1);
    t.levels_[t.depth_[tid]].push_back(tid);
  }
  if (t.levels_.size() > 1) t.subtree_roots_ = t.levels_[1];
  t.subtrees_.resize(t.subtree_roots_.size());
  for (std::size_t s = 0; s < t.subtree_roots_.size(); ++s) {
    t.subtree_of_[t.subtree_roots_[s]] = s;
  }
  // Tree ids grow with depth, so parents are always assigned first.
  for (NodeId tid = 1; tid < n; ++tid) {
    if (t.depth_[tid] > 1) t.subtree_of_[tid] = t.subtree_of_[t.parent_[tid]];
    t.subtrees_[t.subtree_of_[tid]].push_back(tid);
  }
  return t;
}

std::optional<NodeId> SinkTree::tree_id(NodeId original) const {
  auto it = orig_to_tree_.find(original);
  if (it == orig_to_tree_.end()) return std::nullopt;
  return it->second;
}

std::vector<NodeId> SinkTree::path(NodeId i) const {
  std::vector<NodeId> p;
  for (NodeId v = i; v != kNoNode; v = parent_.at(v)) p.push_back(v);
  std::reverse(p.begin(), p.end());
  return p;
}

NodeId SinkTree::lowest_common_ancestor(NodeId a, NodeId b) const {
  while (depth_.at(a) > depth_.at(b)) a = parent_[a];
  while (depth_.at(b) > depth_.at(a)) b = parent_[b];
  while (a != b) {
    a = parent_[a];
    b = parent_[b];
  }
  return a;
}

bool SinkTree::is_ancestor(NodeId ancestor, NodeId node) const {
  if (depth_.at(ancestor) > depth_.at(node)) return false;
  while (depth_[node] > depth_[ancestor]) node = parent_[node];
  return node == ancestor;
}

NodeId SinkTree::child_towards(NodeId ancestor, NodeId node) const {
  if (ancestor == node || !is_ancestor(ancestor, node)) {
    throw ContractError("child_towards: not a proper ancestor");
  }
  while (parent_[node] != ancestor) node = parent_[node];
  return node;
}

std::vector<NodeId> SinkTree::subtree_nodes(NodeId i) const {
  std::vector<NodeId> out{i};
  for (std::size_t head = 0; head < out.size(); ++head) {
    for (NodeId c : children_[out[head]]) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SinkTree::NodeSpec> SinkTree::specs() const {
  std::vector<NodeSpec> out(size());
  for (NodeId i = 0; i < size(); ++i) out[i] = {servers_[i], parent_[i], edge_rate_[i]};
  return out;
}

// ---------------------------------------------------------------------------
// Dijkstra

SinkTree build_sink_tree(const NetworkGraph& g) {
  if (g.size() == 0) throw ContractError("empty network");
  if (auto missing = g.unreachable_from_master(); !missing.empty()) {
    std::ostringstream msg;
    msg << "nodes unreachable from the master:";
    for (NodeId i : missing) msg << ' ' << i;
    throw UnreachableError(msg.str());
  }

  const std::size_t n = g.size();
  std::vector<std::vector<std::pair<NodeId, double>>> adj(n);
  for (const auto& [link, rate] : g.links()) adj[link.first].emplace_back(link.second, rate);

  struct Label {
    double dist = std::numeric_limits<double>::infinity();
    std::size_t hops = 0;
    NodeId pred = kNoNode;
  };
  constexpr double kTieTol = 1e-12;
  auto better = [&](const Label& a, const Label& b) {
    if (std::isinf(a.dist) || std::isinf(b.dist)) return a.dist < b.dist;
    const double scale = std::max(a.dist, b.dist);
    if (a.dist < b.dist - kTieTol * scale) return true;
    if (a.dist > b.dist + kTieTol * scale) return false;
    return std::tie(a.hops, a.pred) < std::tie(b.hops, b.pred);
  };

  std::vector<Label> label(n);
  std::vector<bool> done(n, false);
  label[kMaster] = {0.0, 0, kNoNode};
  using Entry = std::tuple<double, std::size_t, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  pq.emplace(0.0, 0, kMaster);
  while (!pq.empty()) {
    auto [d, h, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = true;
    for (auto [v, rate] : adj[u]) {
      if (done[v]) continue;
      Label cand{label[u].dist + 1.0 / rate, label[u].hops + 1, u};
      if (better(cand, label[v])) {
        label[v] = cand;
        pq.emplace(cand.dist, cand.hops, v);
      }
    }
  }

  std::vector<SinkTree::NodeSpec> specs(n);
  for (NodeId i = 0; i < n; ++i) {
    specs[i].server = g.server(i);
    if (i == kMaster) continue;
    specs[i].parent = label[i].pred;
    specs[i].edge_rate = *g.rate(label[i].pred, i);
  }
  return SinkTree::from_specs(specs);
}

// ---------------------------------------------------------------------------
// Pruning

namespace {

PrunedTree rebuild(const SinkTree& t, const std::vector<bool>& kept,
                   const std::set<NodeId>& forced_zero) {
  std::vector<SinkTree::NodeSpec> specs;
  std::vector<NodeId> spec_index(t.size(), kNoNode);
  for (NodeId i = 0; i < t.size(); ++i) {
    if (!kept[i]) continue;
    spec_index[i] = specs.size();
    SinkTree::NodeSpec s{t.server(i), kNoNode, t.edge_rate(i)};
    if (i != kMaster) s.parent = spec_index[t.parent(i)];
    specs.push_back(s);
  }
  PrunedTree out{SinkTree::from_specs(specs), {}};
  for (NodeId i : forced_zero) {
    if (i < t.size() && kept[i]) out.forced_zero.insert(*out.tree.tree_id(t.original_id(i)));
  }
  return out;
}

}  // namespace

PrunedTree prune_tree(const SinkTree& t, const std::set<NodeId>& remove, PruneMode mode,
                      const std::set<NodeId>& forced_zero) {
  if (remove.contains(kMaster)) throw ParameterError("prune_tree: cannot remove the master");
  for (NodeId i : remove) {
    if (i >= t.size()) throw ParameterError("prune_tree: node " + std::to_string(i) + " not in tree");
  }

  std::vector<bool> kept(t.size(), true);
  std::set<NodeId> relays = forced_zero;
  if (mode == PruneMode::remove_subtree) {
    for (NodeId i = 1; i < t.size(); ++i) {
      kept[i] = kept[t.parent(i)] && !remove.contains(i);
    }
  } else {
    // Children have larger ids than parents: a reverse sweep sees every
    // descendant's decision before its ancestor's.
    for (NodeId i = t.size(); i-- > 1;) {
      if (!remove.contains(i)) continue;
      const auto& kids = t.children(i);
      const bool has_kept_child =
          std::any_of(kids.begin(), kids.end(), [&](NodeId c) { return kept[c]; });
      kept[i] = has_kept_child;
      if (has_kept_child) relays.insert(i);
    }
  }
  return rebuild(t, kept, relays);
}

SubtreeView extract_subtree(const SinkTree& t, std::size_t subtree) {
  if (subtree >= t.subtrees().size()) throw ContractError("extract_subtree: no such subtree");
  std::vector<bool> kept(t.size(), false);
  kept[kMaster] = true;
  for (NodeId i : t.subtrees()[subtree]) kept[i] = true;
  PrunedTree p = rebuild(t, kept, {});
  SubtreeView view{std::move(p.tree), {}};
  view.to_parent.resize(view.tree.size());
  for (NodeId i = 0; i < view.tree.size(); ++i) {
    view.to_parent[i] = *t.tree_id(view.tree.original_id(i));
  }
  return view;
}

}  // namespace offload
