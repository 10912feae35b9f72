#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "offload/network.hpp"

// Named tree-shaped networks used by the experiments. Server parameters are
// drawn from the generator's default ranges with the given seed; links are
// symmetric, so the sink tree reproduces the listed edges.
namespace offload::topologies {

/// 0-1-2-3-4-5-6.
NetworkGraph deep_chain(std::uint64_t seed);
/// 0 -> {1, 2}, 1 -> {3, 4}, 2 -> {5, 6}.
NetworkGraph wide_shallow(std::uint64_t seed);
/// A short branch next to a long one: height 5, nine nodes.
NetworkGraph mixed(std::uint64_t seed);
/// 0 -> {1, 2}, 1 -> {3, 4}, 3 -> {5, 6}, 4 -> 7.
NetworkGraph two_subtree_asymmetric(std::uint64_t seed);
/// k subtrees below the master, each a chain of two nodes.
NetworkGraph subtree_family(std::size_t k, std::uint64_t seed);
/// Two subtrees with hand-set parameters where both the link-rate and
/// the CPU-frequency thresholds fall inside typical sweep ranges.
NetworkGraph characteristics();

/// The four small named topologies.
const std::vector<std::string>& small_names();

/// Any name above; subtree_family takes `k`. Throws ParameterError.
NetworkGraph by_name(const std::string& name, std::uint64_t seed, std::size_t k = 2);

/// Tree-shaped graph from (parent, child) edges over nodes 0..n-1 with
/// randomly drawn parameters.
NetworkGraph random_parameters(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges,
                               std::uint64_t seed);

}  // namespace offload::topologies
