#include "offload/topologies.hpp"

#include "offload/errors.hpp"
#include "offload/rng.hpp"

namespace offload::topologies {

NetworkGraph random_parameters(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& edges,
                               std::uint64_t seed) {
  const GenParams defaults;
  Rng rng(seed);
  std::vector<ServerParams> servers(n);
  for (NodeId i = 0; i < n; ++i) {
    servers[i] = {i, rng.uniform(defaults.freq_range.first, defaults.freq_range.second),
                  units::dbm_to_watts(defaults.tx_power_dbm), defaults.gamma};
  }
  NetworkGraph g(std::move(servers));
  for (const auto& [a, b] : edges) {
    g.add_symmetric_link(a, b, rng.uniform(defaults.rate_range.first, defaults.rate_range.second));
  }
  return g;
}

NetworkGraph deep_chain(std::uint64_t seed) {
  return random_parameters(7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}}, seed);
}

NetworkGraph wide_shallow(std::uint64_t seed) {
  return random_parameters(7, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {2, 6}}, seed);
}

NetworkGraph mixed(std::uint64_t seed) {
  return random_parameters(9, {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {3, 5}, {4, 6}, {5, 7}, {7, 8}},
                           seed);
}

NetworkGraph two_subtree_asymmetric(std::uint64_t seed) {
  return random_parameters(8, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {3, 5}, {3, 6}, {4, 7}}, seed);
}

NetworkGraph subtree_family(std::size_t k, std::uint64_t seed) {
  if (k == 0) throw ParameterError("subtree_family needs at least one subtree");
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t s = 0; s < k; ++s) {
    const NodeId head = 1 + 2 * s;
    edges.emplace_back(0, head);
    edges.emplace_back(head, head + 1);
  }
  return random_parameters(2 * k + 1, edges, seed);
}

NetworkGraph characteristics() {
  // gamma is in J/(cycle*Hz^2); 1e-28 keeps compute energy comparable to
  // transmit energy at GHz clocks.
  constexpr double kGamma = 1e-28;
  std::vector<ServerParams> s = {
      {0, units::ghz_to_hz(1.0), units::dbm_to_watts(10.0), kGamma},
      {1, units::ghz_to_hz(1.0), units::dbm_to_watts(46.0), kGamma},
      {2, units::ghz_to_hz(1.0), units::dbm_to_watts(10.0), kGamma},
      {3, units::ghz_to_hz(5.0), units::dbm_to_watts(10.0), kGamma},
      {4, units::ghz_to_hz(5.0), units::dbm_to_watts(10.0), kGamma},
  };
  NetworkGraph g(std::move(s));
  g.add_symmetric_link(0, 1, units::gbps_to_bps(100.0));
  g.add_symmetric_link(0, 2, units::gbps_to_bps(100.0));
  g.add_symmetric_link(1, 3, units::gbps_to_bps(100.0));
  g.add_symmetric_link(2, 4, units::gbps_to_bps(10.0));
  return g;
}

const std::vector<std::string>& small_names() {
  static const std::vector<std::string> names = {"deep_chain", "wide_shallow", "mixed",
                                                 "two_subtree_asymmetric"};
  return names;
}

NetworkGraph by_name(const std::string& name, std::uint64_t seed, std::size_t k) {
  if (name == "deep_chain") return deep_chain(seed);
  if (name == "wide_shallow") return wide_shallow(seed);
  if (name == "mixed") return mixed(seed);
  if (name == "two_subtree_asymmetric") return two_subtree_asymmetric(seed);
  if (name == "subtree_family") return subtree_family(k, seed);
  if (name == "characteristics") return characteristics();
  throw ParameterError("unknown topology '" + name + "'");
}

}  // namespace offload::topologies
