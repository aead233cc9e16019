#pragma once

#include <vector>

#include "jamloc/scenario.hpp"

namespace jamloc::sampling {

enum class DownsampleMethod { kWindowAveraging, kSpatialBinning };

std::string to_string(DownsampleMethod m);
DownsampleMethod downsample_method_from_string(const std::string& s);

struct DownsampleConfig {
  DownsampleMethod method = DownsampleMethod::kSpatialBinning;
  int target_nodes = 1000;
  double bin_size_m = 1.0;
};

/// Splits the sample sequence into `target_nodes` contiguous segments of
/// near-equal count (remainder goes to the earliest segments) and averages
/// positions and dBm noise within each. Fewer samples than targets passes
/// the input through unchanged.
std::vector<scenario::MeasurementSample> window_average(
    const std::vector<scenario::MeasurementSample>& samples, int target_nodes);

/// Groups samples into origin-anchored cubic bins of edge `bin_size_m`,
/// averages position and dBm noise per bin, and keeps the `target_nodes` bins
/// with the highest mean noise (ties broken by earliest time). The retained
/// bins are returned in temporal order of their earliest member.
std::vector<scenario::MeasurementSample> spatial_bin_filter(
    const std::vector<scenario::MeasurementSample>& samples, int target_nodes,
    double bin_size_m = 1.0);

std::vector<scenario::MeasurementSample> downsample(
    const std::vector<scenario::MeasurementSample>& samples, const DownsampleConfig& cfg);

}  // namespace jamloc::sampling
