#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jamloc/rf.hpp"
#include "jamloc/rng.hpp"

namespace jamloc::scenario {

enum class Topology { kCircle, kTriangle, kRectangle, kRandom, kTrajectory };
enum class Placement { kInsideRegion, kOutsideRegion, kNotApplicable };

std::string to_string(Topology t);
std::string to_string(Placement p);
Topology topology_from_string(const std::string& s);
Placement placement_from_string(const std::string& s);

/// One timestamped noise-floor observation.
struct MeasurementSample {
  Vec3 position;
  double noise_dbm = rf::kAmbientNoiseDbm;
  int time_index = 0;

  bool operator==(const MeasurementSample&) const = default;
};

struct AreaBounds {
  Vec3 min{0.0, 0.0, 0.0};
  Vec3 max{1500.0, 1500.0, 0.0};

  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
  double depth() const { return max.z - min.z; }
  Vec3 center() const { return (min + max) * 0.5; }

  bool operator==(const AreaBounds&) const = default;

  static AreaBounds static_default() { return {{0, 0, 0}, {1500, 1500, 0}}; }
  static AreaBounds dynamic_default() { return {{0, 0, 0}, {500, 500, 50}}; }
};

/// A complete localization problem: measurements plus the ground truth and
/// propagation environment they were generated under.
struct ScenarioInstance {
  std::vector<MeasurementSample> samples;
  rf::JammerConfig jammer;
  rf::PropagationParams propagation;
  Topology topology = Topology::kRandom;
  Placement placement = Placement::kNotApplicable;
  int dimensions = 2;
  uint64_t seed = 0;

  bool operator==(const ScenarioInstance&) const = default;
};

struct StaticGenConfig {
  AreaBounds area = AreaBounds::static_default();
  double comm_range_m = 200.0;
  int min_nodes = 3;
  /// Right-skewed node count draw: min + round(Beta(2,5) * (max - min)).
  int beta_a = 2;
  int beta_b = 5;
  /// A node counts as jammed when its noise floor exceeds ambient by this much.
  double jam_threshold_db = 3.0;
  double detect_threshold_dbm = -80.0;
  int max_retries = 1000;
};

struct DynamicGenConfig {
  AreaBounds area = AreaBounds::dynamic_default();
  int min_steps = 1150;
  int max_steps = 18000;
  double start_radius_min_m = 150.0;
  double start_radius_max_m = 1200.0;
  double end_radius_min_m = 5.0;
  double end_radius_max_m = 35.0;
  double revolutions_min = 2.0;
  double revolutions_max = 6.0;
  double jitter_min_m = 0.5;
  double jitter_max_m = 3.0;
  double jam_threshold_db = 3.0;
  double detect_threshold_dbm = -80.0;
  int max_retries = 1000;
};

/// Node count ceiling, derived from how many communication-range cells fit in
/// the area. The packing factor calibrates the default 1500 m area with 200 m
/// range to a 122-node maximum; the value is recorded in dataset headers.
int max_node_count(const AreaBounds& area, double comm_range_m, int min_nodes = 3);

bool instance_is_valid(const ScenarioInstance& inst, double jam_threshold_db = 3.0,
                       double detect_threshold_dbm = -80.0);

/// Fixed 2D node layouts with a jammer placed uniformly in the area; instances
/// are relabeled by a hull test and resampled until the requested placement and
/// the validity rules hold. Throws GenerationError when the retry budget runs out.
std::vector<ScenarioInstance> generate_static(Topology topology, Placement placement, int count,
                                              uint64_t seed, const StaticGenConfig& cfg = {});

/// Single-device 3D encirclement trajectories: an inward spiral around the
/// jammer with randomized radius span, angular rate, altitude profile and
/// per-step jitter.
std::vector<ScenarioInstance> generate_dynamic(int count, uint64_t seed,
                                               const DynamicGenConfig& cfg = {});

/// JSON-lines persistence: one header line (schema version, PRNG name,
/// generator settings), then one instance per line. Round trips exactly.
void write_dataset(const std::vector<ScenarioInstance>& instances, const std::string& path);
std::vector<ScenarioInstance> read_dataset(const std::string& path);

/// FNV-1a style fingerprint over the serialized instances; recorded in
/// checkpoints and evaluation reports.
uint64_t dataset_fingerprint(const std::vector<ScenarioInstance>& instances);

}  // namespace jamloc::scenario
