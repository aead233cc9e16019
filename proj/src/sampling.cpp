#include "jamloc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace jamloc::sampling {

std::string to_string(DownsampleMethod m) {
  return m == DownsampleMethod::kWindowAveraging ? "window" : "binning";
}

DownsampleMethod downsample_method_from_string(const std::string& s) {
  if (s == "window") return DownsampleMethod::kWindowAveraging;
  if (s == "binning") return DownsampleMethod::kSpatialBinning;
  throw std::invalid_argument("unknown downsample method: " + s);
}

namespace {

scenario::MeasurementSample average_of(const std::vector<scenario::MeasurementSample>& samples,
                                       const std::vector<size_t>& members) {
  Vec3 pos;
  double noise = 0.0;
  int earliest = samples[members[0]].time_index;
  for (size_t idx : members) {
    pos += samples[idx].position;
    noise += samples[idx].noise_dbm;
    earliest = std::min(earliest, samples[idx].time_index);
  }
  const double n = static_cast<double>(members.size());
  return {pos / n, noise / n, earliest};
}

}  // namespace

std::vector<scenario::MeasurementSample> window_average(
    const std::vector<scenario::MeasurementSample>& samples, int target_nodes) {
  const int n = static_cast<int>(samples.size());
  if (target_nodes <= 0 || n <= target_nodes) return samples;

  std::vector<scenario::MeasurementSample> out;
  out.reserve(target_nodes);
  const int base = n / target_nodes;
  const int remainder = n % target_nodes;
  size_t cursor = 0;
  for (int seg = 0; seg < target_nodes; ++seg) {
    const int len = base + (seg < remainder ? 1 : 0);
    std::vector<size_t> members(len);
    for (int i = 0; i < len; ++i) members[i] = cursor + i;
    cursor += len;
    scenario::MeasurementSample s = average_of(samples, members);
    s.time_index = samples[members[0]].time_index;
    out.push_back(s);
  }
  return out;
}

std::vector<scenario::MeasurementSample> spatial_bin_filter(
    const std::vector<scenario::MeasurementSample>& samples, int target_nodes,
    double bin_size_m) {
  if (samples.empty()) return {};
  if (bin_size_m <= 0.0) throw std::invalid_argument("spatial_bin_filter: bin size must be > 0");

  using BinKey = std::tuple<long long, long long, long long>;
  std::map<BinKey, std::vector<size_t>> bins;
  for (size_t i = 0; i < samples.size(); ++i) {
    const Vec3& p = samples[i].position;
    BinKey key{static_cast<long long>(std::floor(p.x / bin_size_m)),
               static_cast<long long>(std::floor(p.y / bin_size_m)),
               static_cast<long long>(std::floor(p.z / bin_size_m))};
    bins[key].push_back(i);
  }

  struct BinAgg {
    scenario::MeasurementSample sample;
    int earliest_time;
  };
  std::vector<BinAgg> aggregated;
  aggregated.reserve(bins.size());
  for (const auto& [key, members] : bins) {
    scenario::MeasurementSample s = average_of(samples, members);
    aggregated.push_back({s, s.time_index});
  }

  std::stable_sort(aggregated.begin(), aggregated.end(), [](const BinAgg& a, const BinAgg& b) {
    if (a.sample.noise_dbm != b.sample.noise_dbm) return a.sample.noise_dbm > b.sample.noise_dbm;
    return a.earliest_time < b.earliest_time;
  });
  if (target_nodes > 0 && aggregated.size() > static_cast<size_t>(target_nodes)) {
    aggregated.resize(target_nodes);
  }

  // Restore temporal order so trajectory features stay meaningful downstream.
  std::sort(aggregated.begin(), aggregated.end(),
            [](const BinAgg& a, const BinAgg& b) { return a.earliest_time < b.earliest_time; });

  std::vector<scenario::MeasurementSample> out;
  out.reserve(aggregated.size());
  for (const auto& bin : aggregated) out.push_back(bin.sample);
  return out;
}

std::vector<scenario::MeasurementSample> downsample(
    const std::vector<scenario::MeasurementSample>& samples, const DownsampleConfig& cfg) {
  switch (cfg.method) {
    case DownsampleMethod::kWindowAveraging:
      return window_average(samples, cfg.target_nodes);
    case DownsampleMethod::kSpatialBinning:
      return spatial_bin_filter(samples, cfg.target_nodes, cfg.bin_size_m);
  }
  throw std::logic_error("unreachable");
}

}  // namespace jamloc::sampling
