#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jamloc/scenario.hpp"

namespace jamloc::scenario {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

json instance_to_json(const ScenarioInstance& inst) {
  json samples = json::array();
  for (const auto& s : inst.samples) {
    samples.push_back({s.position.x, s.position.y, s.position.z, s.noise_dbm, s.time_index});
  }
  return json{
      {"topology", to_string(inst.topology)},
      {"placement", to_string(inst.placement)},
      {"dim", inst.dimensions},
      {"seed", inst.seed},
      {"jammer",
       {{"position", {inst.jammer.position.x, inst.jammer.position.y, inst.jammer.position.z}},
        {"tx_power_dbm", inst.jammer.tx_power_dbm},
        {"tx_gain_dbi", inst.jammer.tx_gain_dbi},
        {"rx_gain_dbi", inst.jammer.rx_gain_dbi}}},
      {"propagation",
       {{"pl0_db", inst.propagation.pl0_db},
        {"gamma", inst.propagation.gamma},
        {"sigma_db", inst.propagation.sigma_db},
        {"d0_m", inst.propagation.d0_m},
        {"ambient_dbm", inst.propagation.ambient_noise_dbm}}},
      {"samples", std::move(samples)},
  };
}

ScenarioInstance instance_from_json(const json& j) {
  ScenarioInstance inst;
  inst.topology = topology_from_string(j.at("topology").get<std::string>());
  inst.placement = placement_from_string(j.at("placement").get<std::string>());
  inst.dimensions = j.at("dim").get<int>();
  inst.seed = j.at("seed").get<uint64_t>();
  const json& jam = j.at("jammer");
  const json& pos = jam.at("position");
  inst.jammer.position = {pos.at(0).get<double>(), pos.at(1).get<double>(),
                          pos.at(2).get<double>()};
  inst.jammer.tx_power_dbm = jam.at("tx_power_dbm").get<double>();
  inst.jammer.tx_gain_dbi = jam.at("tx_gain_dbi").get<double>();
  inst.jammer.rx_gain_dbi = jam.at("rx_gain_dbi").get<double>();
  const json& prop = j.at("propagation");
  inst.propagation.pl0_db = prop.at("pl0_db").get<double>();
  inst.propagation.gamma = prop.at("gamma").get<double>();
  inst.propagation.sigma_db = prop.at("sigma_db").get<double>();
  inst.propagation.d0_m = prop.at("d0_m").get<double>();
  inst.propagation.ambient_noise_dbm = prop.at("ambient_dbm").get<double>();
  for (const json& s : j.at("samples")) {
    inst.samples.push_back({{s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()},
                            s.at(3).get<double>(),
                            s.at(4).get<int>()});
  }
  return inst;
}

void check_structure(const ScenarioInstance& inst, size_t record_index) {
  if (inst.samples.empty()) {
    throw DatasetFormatError("record " + std::to_string(record_index) + ": no samples");
  }
  for (const auto& s : inst.samples) {
    if (!s.position.finite() || !std::isfinite(s.noise_dbm)) {
      throw DatasetFormatError("record " + std::to_string(record_index) +
                               ": non-finite sample value");
    }
    if (s.noise_dbm < inst.propagation.ambient_noise_dbm - 1e-9) {
      throw DatasetFormatError("record " + std::to_string(record_index) +
                               ": noise below ambient floor");
    }
  }
}

}  // namespace

void write_dataset(const std::vector<ScenarioInstance>& instances, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DatasetFormatError("cannot open for writing: " + path);

  bool all_valid = true;
  for (const auto& inst : instances) {
    if (!instance_is_valid(inst)) {
      all_valid = false;
      break;
    }
  }
  json header{
      {"format", "jamloc-dataset"},
      {"version", kSchemaVersion},
      {"prng", Rng::kPrngName},
      {"count", instances.size()},
      {"validated", all_valid},
      {"node_count_rule", "min + round(Beta(2,5) * (max - min)), max = floor(2.17 * area/range^2)"},
  };
  out << header.dump() << '\n';
  for (const auto& inst : instances) out << instance_to_json(inst).dump() << '\n';
  if (!out) throw DatasetFormatError("write failed: " + path);
}

std::vector<ScenarioInstance> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetFormatError("cannot open for reading: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DatasetFormatError("empty file (missing header): " + path);
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DatasetFormatError("line 1: malformed header: " + std::string(e.what()));
  }
  if (header.value("format", "") != "jamloc-dataset") {
    throw DatasetFormatError("line 1: not a jamloc dataset file");
  }
  const int version = header.value("version", -1);
  if (version != kSchemaVersion) {
    throw DatasetFormatError("version mismatch: file has version " + std::to_string(version) +
                             ", reader supports " + std::to_string(kSchemaVersion));
  }
  const bool validated = header.value("validated", false);
  const size_t expected = header.value("count", size_t{0});

  std::vector<ScenarioInstance> instances;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t record_index = instances.size();
    ScenarioInstance inst;
    try {
      inst = instance_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw DatasetFormatError("line " + std::to_string(line_no) + " (record " +
                               std::to_string(record_index) + "): " + e.what());
    }
    check_structure(inst, record_index);
    if (validated && !instance_is_valid(inst)) {
      throw DatasetFormatError("record " + std::to_string(record_index) +
                               ": fails validity rules claimed by the header");
    }
    instances.push_back(std::move(inst));
  }
  if (expected != instances.size()) {
    throw DatasetFormatError("record " + std::to_string(instances.size()) +
                             ": file truncated, header announced " + std::to_string(expected) +
                             " records but only " + std::to_string(instances.size()) +
                             " are present");
  }
  return instances;
}

uint64_t dataset_fingerprint(const std::vector<ScenarioInstance>& instances) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& inst : instances) mix(instance_to_json(inst).dump());
  return h;
}

}  // namespace jamloc::scenario
