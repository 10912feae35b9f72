#include "offload/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "offload/errors.hpp"

namespace offload::json_io {

namespace {

double frequency_factor(const std::string& unit) {
  if (unit == "Hz") return 1.0;
  if (unit == "MHz") return units::kMega;
  if (unit == "GHz") return units::kGiga;
  throw ValidationError("unknown frequency unit '" + unit + "'");
}

double rate_factor(const std::string& unit) {
  if (unit == "bps") return 1.0;
  if (unit == "Mbps") return units::kMega;
  if (unit == "Gbps") return units::kGiga;
  throw ValidationError("unknown rate unit '" + unit + "'");
}

double power_to_watts(double v, const std::string& unit) {
  if (unit == "W") return v;
  if (unit == "mW") return v * 1e-3;
  if (unit == "dBm") return units::dbm_to_watts(v);
  throw ValidationError("unknown power unit '" + unit + "'");
}

std::string unit_of(const json& j, const char* key, const char* fallback) {
  if (!j.contains("units")) return fallback;
  return j.at("units").value(key, std::string(fallback));
}

}  // namespace

json to_json(const NetworkGraph& g) {
  json j;
  j["units"] = {{"cpu_freq", "Hz"}, {"tx_power", "W"}, {"rate", "bps"}};
  j["servers"] = json::array();
  for (const ServerParams& s : g.servers()) {
    j["servers"].push_back(
        {{"id", s.id}, {"cpu_freq", s.cpu_freq}, {"tx_power", s.tx_power}, {"gamma", s.switched_cap}});
  }
  j["links"] = json::array();
  for (const auto& [link, rate] : g.links()) {
    j["links"].push_back({{"i", link.first}, {"j", link.second}, {"rate", rate}});
  }
  return j;
}

NetworkGraph network_from_json(const json& j) {
  try {
    const double f_scale = frequency_factor(unit_of(j, "cpu_freq", "Hz"));
    const std::string p_unit = unit_of(j, "tx_power", "W");
    const double r_scale = rate_factor(unit_of(j, "rate", "bps"));

    std::vector<ServerParams> servers;
    for (const json& s : j.at("servers")) {
      ServerParams p;
      p.id = s.at("id").get<NodeId>();
      p.cpu_freq = s.contains("cpu_freq_ghz") ? units::ghz_to_hz(s["cpu_freq_ghz"].get<double>())
                                              : s.at("cpu_freq").get<double>() * f_scale;
      p.tx_power = s.contains("tx_power_dbm")
                       ? units::dbm_to_watts(s["tx_power_dbm"].get<double>())
                       : power_to_watts(s.at("tx_power").get<double>(), p_unit);
      p.switched_cap = s.at("gamma").get<double>();
      servers.push_back(p);
    }
    std::sort(servers.begin(), servers.end(),
              [](const ServerParams& a, const ServerParams& b) { return a.id < b.id; });
    NetworkGraph g(std::move(servers));
    for (const json& l : j.value("links", json::array())) {
      const double rate = l.contains("rate_gbps") ? units::gbps_to_bps(l["rate_gbps"].get<double>())
                                                  : l.at("rate").get<double>() * r_scale;
      const NodeId a = l.at("i").get<NodeId>();
      const NodeId b = l.at("j").get<NodeId>();
      if (l.value("symmetric", false)) {
        g.add_symmetric_link(a, b, rate);
      } else {
        g.add_link(a, b, rate);
      }
    }
    return g;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("network file: ") + e.what());
  }
}

void save_network(const NetworkGraph& g, const std::string& path) { write_file(to_json(g), path); }

NetworkGraph load_network(const std::string& path) { return network_from_json(read_file(path)); }

json to_json(const Weights& w) { return {{"w1", w.time}, {"w2", w.energy}}; }

Weights weights_from_json(const json& j) {
  return {j.at("w1").get<double>(), j.at("w2").get<double>()};
}

json to_json(const Schedule& s) { return s.sequences; }

Schedule schedule_from_json(const json& j) {
  return {j.get<std::vector<std::vector<NodeId>>>()};
}

json to_json(const CostBreakdown& b) {
  json nodes = json::array();
  for (const NodeCost& c : b.nodes) {
    nodes.push_back({{"T_tran", c.t_tran},
                     {"T_wait", c.t_wait},
                     {"T_comp", c.t_comp},
                     {"T_total", c.t_total},
                     {"E_comp", c.e_comp},
                     {"E_comm", c.e_comm},
                     {"E_total", c.e_total},
                     {"J", c.cost}});
  }
  return {{"nodes", nodes}, {"J", b.system_cost}};
}

CostBreakdown breakdown_from_json(const json& j) {
  CostBreakdown b;
  b.system_cost = j.at("J").get<double>();
  for (const json& n : j.at("nodes")) {
    NodeCost c;
    c.t_tran = n.at("T_tran");
    c.t_wait = n.at("T_wait");
    c.t_comp = n.at("T_comp");
    c.t_total = n.at("T_total");
    c.e_comp = n.at("E_comp");
    c.e_comm = n.at("E_comm");
    c.e_total = n.at("E_total");
    c.cost = n.at("J");
    b.nodes.push_back(c);
  }
  return b;
}

json to_json(const Solution& s) {
  return {{"y", s.allocation.y},
          {"total", s.allocation.total},
          {"schedule", to_json(s.schedule)},
          {"cost", s.cost},
          {"breakdown", to_json(s.breakdown)},
          {"solver", s.solver_tag},
          {"base_task_size", s.base_task_size},
          {"schedules_evaluated", s.stats.schedules_evaluated},
          {"lp_solves", s.stats.lp_solves}};
}

Solution solution_from_json(const json& j) {
  Solution s;
  s.allocation.y = j.at("y").get<std::vector<double>>();
  s.allocation.total = j.at("total");
  s.schedule = schedule_from_json(j.at("schedule"));
  s.cost = j.at("cost");
  s.breakdown = breakdown_from_json(j.at("breakdown"));
  s.solver_tag = j.at("solver");
  s.base_task_size = j.at("base_task_size");
  s.stats.schedules_evaluated = j.value("schedules_evaluated", std::uint64_t{0});
  s.stats.lp_solves = j.value("lp_solves", std::uint64_t{0});
  return s;
}

json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace offload::json_io
