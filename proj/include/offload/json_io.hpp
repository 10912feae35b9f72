#pragma once

#include <string>

#include <json.hpp>

#include "offload/cost_model.hpp"
#include "offload/exact_solvers.hpp"
#include "offload/network.hpp"

// JSON (de)serialization for the library's value types and the network file
// format. Network files carry a `units` block; values are converted to SI on
// load, and written back in SI so that a save/load cycle is exact.
namespace offload::json_io {

using nlohmann::json;

json to_json(const NetworkGraph& g);
/// Accepts `cpu_freq_ghz`/`tx_power_dbm`/`rate_gbps`, or unit-neutral
/// `cpu_freq`/`tx_power`/`rate` interpreted through the `units` block.
NetworkGraph network_from_json(const json& j);

void save_network(const NetworkGraph& g, const std::string& path);
NetworkGraph load_network(const std::string& path);

json to_json(const Weights& w);
Weights weights_from_json(const json& j);

json to_json(const Schedule& s);
Schedule schedule_from_json(const json& j);

json to_json(const CostBreakdown& b);
CostBreakdown breakdown_from_json(const json& j);

json to_json(const Solution& s);
Solution solution_from_json(const json& j);

json read_file(const std::string& path);
void write_file(const json& j, const std::string& path);

}  // namespace offload::json_io
