#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jamloc/scenario.hpp"

namespace jamloc::graph {

/// Maps raw meters/dBm into the normalized feature space and back. Static
/// scenarios share one fixed transform anchored at the area minimum corner;
/// dynamic graphs carry a per-instance bounding-box transform.
struct NormalizationTransform {
  Vec3 position_offset;
  Vec3 position_scale{1.0, 1.0, 1.0};
  double noise_min_dbm = -100.0;
  double noise_max_dbm = 80.0;
  double r_scale_m = 1.0;

  double noise_range() const { return noise_max_dbm - noise_min_dbm; }
  double normalize_noise(double dbm) const { return (dbm - noise_min_dbm) / noise_range(); }
  Vec3 normalize_position(const Vec3& p) const {
    const Vec3 d = p - position_offset;
    return {d.x / position_scale.x, d.y / position_scale.y, d.z / position_scale.z};
  }
  Vec3 center() const { return position_offset + position_scale * 0.5; }

  static NormalizationTransform for_static_area(const scenario::AreaBounds& area);
  static NormalizationTransform for_bounding_box(const std::vector<Vec3>& positions);
};

/// Normalized radial/angular position encoding; also the regression target.
struct AngularPosition {
  double r = 0.0;
  double sin_theta = 0.0;
  double cos_theta = 1.0;
  double sin_phi = 0.0;
  double cos_phi = 1.0;

  Eigen::Matrix<double, 5, 1> vec() const {
    Eigen::Matrix<double, 5, 1> v;
    v << r, sin_theta, cos_theta, sin_phi, cos_phi;
    return v;
  }
  static AngularPosition from_vec(const Eigen::Matrix<double, 5, 1>& v) {
    return {v[0], v[1], v[2], v[3], v[4]};
  }
};

AngularPosition encode_angular(const Vec3& position_m, const NormalizationTransform& t);
/// Inverse of encode_angular; angles recovered via atan2, so unnormalized
/// model outputs decode cleanly.
Vec3 decode_angular(const AngularPosition& ap, const NormalizationTransform& t);

/// Edge weight curve: exp(-d) * (e - exp(d)) / (e - 1) over the distance
/// normalized by the longest edge. Exactly 1 at d=0 and 0 at d=1.
double edge_weight(double normalized_distance);

struct KnnResult {
  std::vector<std::pair<int, int>> edges;  ///< (src, dst); dst aggregates src
  std::vector<double> weights;
  std::vector<std::vector<int>> neighbors;  ///< per-node kNN list (self excluded)
  double max_edge_distance_m = 0.0;
};

/// K-nearest-neighbor edges with exponential-falloff weights. Distance ties
/// break toward the lower node index. Symmetrized unless `directed`.
/// Throws GraphConstructionError for fewer than 2 nodes.
KnnResult knn_edges(const std::vector<Vec3>& positions, int k, bool directed = false);

/// Shared weighted-centroid arithmetic: linear-scale noise weights over dBm
/// inputs. Used identically by the WCL estimator and the supernode position.
Vec3 weighted_centroid(const std::vector<Vec3>& positions, const std::vector<double>& noise_dbm);

enum class SupernodeEdges { kDirected, kUndirected, kNone };

/// Feature-column selection, mostly for the node-feature ablation grid.
/// Default layout (static):
///   [noise, r, sin_t, cos_t, sin_p, cos_p, x, y, z, median, max, delta,
///    wc_x, wc_y, wc_z, wc_dist]
/// dynamic appends [dir_x, dir_y, dir_z, noise_delta_t].
struct FeatureMask {
  bool cartesian = true;
  bool neighbor_median = true;
  bool neighbor_max = true;
  bool noise_deviation = true;
  bool weighted_centroid = true;
  bool centroid_distance = true;
  bool direction = true;       ///< dynamic only
  bool temporal_delta = true;  ///< dynamic only
  // Extras that are off by default; the ablation tables exercise them.
  bool azimuth_to_centroid = false;
  bool azimuth_to_wc = false;
  bool moving_average = false;  ///< dynamic only
  bool path_distance = false;   ///< dynamic only
  bool random_feature = false;

  int feature_count(bool dynamic_mode) const;
};

struct GraphConfig {
  int k = 3;
  bool knn_directed = false;
  bool use_supernode = false;
  SupernodeEdges supernode_edges = SupernodeEdges::kDirected;
  FeatureMask features;
  /// Fixed transform for static data; dynamic graphs always use their own
  /// bounding box.
  std::optional<NormalizationTransform> static_transform;

  NormalizationTransform transform_for(const std::vector<Vec3>& positions, int dims) const;
};

struct MeasurementGraph {
  // Raw per-node measurements; features are recomputed from these after
  // augmentation.
  std::vector<Vec3> positions_raw;
  std::vector<double> noise_raw_dbm;
  std::vector<int> time_indices;
  int dims = 2;
  bool dynamic_mode = false;

  Eigen::MatrixXd node_features;  ///< |V'| x F (includes the supernode row if attached)
  std::vector<std::pair<int, int>> edges;
  std::vector<double> edge_weights;
  std::vector<std::vector<int>> feature_neighbors;
  double max_edge_distance_m = 0.0;
  int supernode_index = -1;
  Vec3 supernode_position_m;
  double supernode_noise_dbm = 0.0;

  NormalizationTransform transform;
  AngularPosition target;
  AngularPosition wcl_estimate;
  Vec3 jammer_position_m;
  Vec3 wcl_position_m;

  int num_measurement_nodes() const { return static_cast<int>(positions_raw.size()); }
  int num_nodes() const {
    return num_measurement_nodes() + (supernode_index >= 0 ? 1 : 0);
  }
};

/// Builds the measurement graph for an instance: KNN edges, node features,
/// normalization, target/prior encodings. The supernode is not attached here;
/// call attach_supernode after any augmentation.
MeasurementGraph build_graph(const scenario::ScenarioInstance& inst, const GraphConfig& cfg);

/// Same, from an explicit sample subsequence (e.g. a trajectory prefix).
MeasurementGraph build_graph(const std::vector<scenario::MeasurementSample>& samples,
                             const scenario::ScenarioInstance& inst, const GraphConfig& cfg);

/// Adds the global-aggregator node at the noise-weighted centroid, with
/// inbound edges from every measurement node (direction per config).
void attach_supernode(MeasurementGraph& g, const GraphConfig& cfg);

enum class Augmentation { kDropNode, kFeatureNoise, kCrop, kRotation };

std::string to_string(Augmentation a);
Augmentation augmentation_from_string(const std::string& s);

/// Training-time augmentation; rebuilds edges and features where node
/// positions change. Graphs with fewer than 3 measurement nodes pass through
/// untouched. Must be applied before attach_supernode.
void augment(MeasurementGraph& g, Augmentation kind, double p, Rng& rng, const GraphConfig& cfg);

/// Planar rotation of the raw node positions (and jammer ground truth) about
/// the transform center; the rotation branch of augment() with an explicit
/// angle. Pairwise distances, hence edge weights, are preserved.
void rotate_graph(MeasurementGraph& g, double angle_rad, const GraphConfig& cfg);

/// Uniform contiguous window over a trajectory, resampled until it contains
/// at least 3 samples above the detection threshold (100 tries, then the full
/// instance is returned).
scenario::ScenarioInstance trajectory_crop(const scenario::ScenarioInstance& inst, Rng& rng,
                                           double detect_threshold_dbm = -80.0);

}  // namespace jamloc::graph
