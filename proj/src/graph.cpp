#include "jamloc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace jamloc::graph {

NormalizationTransform NormalizationTransform::for_static_area(const scenario::AreaBounds& area) {
  NormalizationTransform t;
  t.position_offset = area.min;
  const double w = area.width();
  const double h = area.height();
  t.position_scale = {w, h, std::max(w, h)};
  t.r_scale_m = std::hypot(w, h);
  return t;
}

NormalizationTransform NormalizationTransform::for_bounding_box(
    const std::vector<Vec3>& positions) {
  Vec3 lo = positions.empty() ? Vec3{} : positions[0];
  Vec3 hi = lo;
  for (const Vec3& p : positions) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  NormalizationTransform t;
  t.position_offset = lo;
  const Vec3 extent = hi - lo;
  t.position_scale = {std::max(extent.x, 1.0), std::max(extent.y, 1.0),
                      std::max(extent.z, 1.0)};
  t.r_scale_m = std::max(extent.norm(), 1.0);
  return t;
}

AngularPosition encode_angular(const Vec3& position_m, const NormalizationTransform& t) {
  const Vec3 d = position_m - t.position_offset;
  AngularPosition ap;
  ap.r = d.norm() / t.r_scale_m;
  const double theta = std::atan2(d.y, d.x);
  const double phi = std::atan2(d.z, d.norm_xy());
  ap.sin_theta = std::sin(theta);
  ap.cos_theta = std::cos(theta);
  ap.sin_phi = std::sin(phi);
  ap.cos_phi = std::cos(phi);
  return ap;
}

Vec3 decode_angular(const AngularPosition& ap, const NormalizationTransform& t) {
  const double theta = std::atan2(ap.sin_theta, ap.cos_theta);
  const double phi = std::atan2(ap.sin_phi, ap.cos_phi);
  const double rm = ap.r * t.r_scale_m;
  return t.position_offset + Vec3{rm * std::cos(phi) * std::cos(theta),
                                  rm * std::cos(phi) * std::sin(theta), rm * std::sin(phi)};
}

double edge_weight(double normalized_distance) {
  const double e = std::exp(1.0);
  return std::exp(-normalized_distance) * (e - std::exp(normalized_distance)) / (e - 1.0);
}

KnnResult knn_edges(const std::vector<Vec3>& positions, int k, bool directed) {
  const int n = static_cast<int>(positions.size());
  if (n < 2) throw GraphConstructionError("knn_edges: need at least 2 nodes, got " +
                                          std::to_string(n));
  if (k < 1) throw std::invalid_argument("knn_edges: k must be >= 1");
  const int k_eff = std::min(k, n - 1);

  KnnResult result;
  result.neighbors.resize(n);
  std::set<std::pair<int, int>> edge_set;
  std::vector<std::pair<double, int>> candidates;
  candidates.reserve(n - 1);
  for (int i = 0; i < n; ++i) {
    candidates.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) candidates.emplace_back(distance(positions[i], positions[j]), j);
    }
    std::partial_sort(candidates.begin(), candidates.begin() + k_eff, candidates.end());
    result.neighbors[i].reserve(k_eff);
    for (int m = 0; m < k_eff; ++m) {
      const int j = candidates[m].second;
      result.neighbors[i].push_back(j);
      edge_set.emplace(j, i);  // i aggregates from its neighbor j
      if (!directed) edge_set.emplace(i, j);
    }
  }

  double d_max = 0.0;
  for (const auto& [src, dst] : edge_set) {
    d_max = std::max(d_max, distance(positions[src], positions[dst]));
  }
  result.max_edge_distance_m = d_max;
  result.edges.assign(edge_set.begin(), edge_set.end());
  result.weights.reserve(result.edges.size());
  for (const auto& [src, dst] : result.edges) {
    const double d = distance(positions[src], positions[dst]);
    result.weights.push_back(d_max > 0.0 ? edge_weight(d / d_max) : 1.0);
  }
  return result;
}

Vec3 weighted_centroid(const std::vector<Vec3>& positions, const std::vector<double>& noise_dbm) {
  Vec3 acc;
  double total = 0.0;
  for (size_t i = 0; i < positions.size(); ++i) {
    const double w = rf::dbm_to_mw(noise_dbm[i]);
    acc += positions[i] * w;
    total += w;
  }
  return acc / total;
}

int FeatureMask::feature_count(bool dynamic_mode) const {
  int f = 6;  // noise + angular five-tuple
  if (cartesian) f += 3;
  if (neighbor_median) f += 1;
  if (neighbor_max) f += 1;
  if (noise_deviation) f += 1;
  if (weighted_centroid) f += 3;
  if (centroid_distance) f += 1;
  if (dynamic_mode && direction) f += 3;
  if (dynamic_mode && temporal_delta) f += 1;
  if (azimuth_to_centroid) f += 2;
  if (azimuth_to_wc) f += 2;
  if (dynamic_mode && moving_average) f += 1;
  if (dynamic_mode && path_distance) f += 1;
  if (random_feature) f += 1;
  return f;
}

namespace {

struct TemporalFeatures {
  std::vector<Vec3> direction;
  std::vector<double> noise_delta;
  std::vector<double> moving_avg;
  std::vector<double> path_dist;
};

// Forward differences along the sample sequence; the last node falls back to
// the backward difference.
TemporalFeatures temporal_features(const std::vector<Vec3>& positions,
                                   const std::vector<double>& noise) {
  const int n = static_cast<int>(positions.size());
  TemporalFeatures tf;
  tf.direction.resize(n);
  tf.noise_delta.resize(n, 0.0);
  tf.moving_avg.resize(n, 0.0);
  tf.path_dist.resize(n, 0.0);
  for (int i = 0; i < n; ++i) {
    if (i + 1 < n) {
      tf.direction[i] = positions[i + 1] - positions[i];
      tf.noise_delta[i] = noise[i + 1] - noise[i];
    } else if (i > 0) {
      tf.direction[i] = positions[i] - positions[i - 1];
      tf.noise_delta[i] = noise[i] - noise[i - 1];
    }
    const int w0 = std::max(0, i - 4);
    double acc = 0.0;
    for (int j = w0; j <= i; ++j) acc += noise[j];
    tf.moving_avg[i] = acc / (i - w0 + 1);
    if (i > 0) tf.path_dist[i] = tf.path_dist[i - 1] + distance(positions[i], positions[i - 1]);
  }
  return tf;
}

double deterministic_unit_value(uint64_t key) {
  return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

Eigen::RowVectorXd feature_row(int width, const Vec3& pos, double eta,
                               const std::vector<int>& nbrs, const std::vector<Vec3>& positions,
                               const std::vector<double>& noise, const NormalizationTransform& t,
                               const FeatureMask& mask, bool dynamic_mode, const Vec3& dir,
                               double noise_delta, double moving_avg, double path_dist,
                               const Vec3& global_centroid, uint64_t random_key) {
  Eigen::RowVectorXd row(width);
  int c = 0;
  row[c++] = t.normalize_noise(eta);
  const AngularPosition ap = encode_angular(pos, t);
  row[c++] = ap.r;
  row[c++] = ap.sin_theta;
  row[c++] = ap.cos_theta;
  row[c++] = ap.sin_phi;
  row[c++] = ap.cos_phi;
  const Vec3 cart = t.normalize_position(pos);
  if (mask.cartesian) {
    row[c++] = cart.x;
    row[c++] = cart.y;
    row[c++] = cart.z;
  }

  std::vector<double> nbr_noise;
  nbr_noise.reserve(nbrs.size());
  double max_noise = -std::numeric_limits<double>::infinity();
  double mean_noise = 0.0;
  Vec3 wc;
  double wc_total = 0.0;
  for (int j : nbrs) {
    nbr_noise.push_back(noise[j]);
    max_noise = std::max(max_noise, noise[j]);
    mean_noise += noise[j];
    const double w = rf::dbm_to_mw(noise[j]);
    wc += positions[j] * w;
    wc_total += w;
  }
  mean_noise /= static_cast<double>(nbrs.size());
  wc = wc / wc_total;

  if (mask.neighbor_median) {
    std::sort(nbr_noise.begin(), nbr_noise.end());
    const size_t m = nbr_noise.size();
    const double median =
        m % 2 == 1 ? nbr_noise[m / 2] : 0.5 * (nbr_noise[m / 2 - 1] + nbr_noise[m / 2]);
    row[c++] = t.normalize_noise(median);
  }
  if (mask.neighbor_max) row[c++] = t.normalize_noise(max_noise);
  if (mask.noise_deviation) row[c++] = (eta - mean_noise) / t.noise_range();
  if (mask.weighted_centroid) {
    const Vec3 wc_norm = t.normalize_position(wc);
    row[c++] = wc_norm.x;
    row[c++] = wc_norm.y;
    row[c++] = wc_norm.z;
  }
  if (mask.centroid_distance) row[c++] = distance(pos, wc) / t.r_scale_m;

  if (dynamic_mode && mask.direction) {
    row[c++] = dir.x / t.position_scale.x;
    row[c++] = dir.y / t.position_scale.y;
    row[c++] = dir.z / t.position_scale.z;
  }
  if (dynamic_mode && mask.temporal_delta) row[c++] = noise_delta / t.noise_range();

  if (mask.azimuth_to_centroid) {
    const double az = std::atan2(global_centroid.y - pos.y, global_centroid.x - pos.x);
    row[c++] = std::sin(az);
    row[c++] = std::cos(az);
  }
  if (mask.azimuth_to_wc) {
    const double az = std::atan2(wc.y - pos.y, wc.x - pos.x);
    row[c++] = std::sin(az);
    row[c++] = std::cos(az);
  }
  if (dynamic_mode && mask.moving_average) row[c++] = t.normalize_noise(moving_avg);
  if (dynamic_mode && mask.path_distance) row[c++] = path_dist / t.r_scale_m;
  if (mask.random_feature) row[c++] = deterministic_unit_value(random_key);
  return row;
}

NormalizationTransform choose_transform(const std::vector<Vec3>& positions, bool dynamic_mode,
                                        const GraphConfig& cfg) {
  if (!dynamic_mode && cfg.static_transform) return *cfg.static_transform;
  if (dynamic_mode) return NormalizationTransform::for_bounding_box(positions);
  return cfg.static_transform.value_or(
      NormalizationTransform::for_static_area(scenario::AreaBounds::static_default()));
}

// Recomputes everything derived from the raw node arrays: edges, features,
// transform (dynamic only), target and prior encodings.
void finalize_graph(MeasurementGraph& g, const GraphConfig& cfg) {
  const int n = g.num_measurement_nodes();
  if (n < 2) throw GraphConstructionError("graph needs at least 2 measurement nodes");

  KnnResult knn = knn_edges(g.positions_raw, cfg.k, cfg.knn_directed);
  g.edges = std::move(knn.edges);
  g.edge_weights = std::move(knn.weights);
  g.feature_neighbors = std::move(knn.neighbors);
  g.max_edge_distance_m = knn.max_edge_distance_m;

  if (g.dynamic_mode) g.transform = NormalizationTransform::for_bounding_box(g.positions_raw);

  const TemporalFeatures tf = g.dynamic_mode
                                  ? temporal_features(g.positions_raw, g.noise_raw_dbm)
                                  : TemporalFeatures{};
  Vec3 centroid;
  for (const Vec3& p : g.positions_raw) centroid += p;
  centroid = centroid / static_cast<double>(n);

  const int f = cfg.features.feature_count(g.dynamic_mode);
  g.node_features.resize(n, f);
  for (int i = 0; i < n; ++i) {
    g.node_features.row(i) = feature_row(
        f, g.positions_raw[i], g.noise_raw_dbm[i], g.feature_neighbors[i], g.positions_raw,
        g.noise_raw_dbm, g.transform, cfg.features, g.dynamic_mode,
        g.dynamic_mode ? tf.direction[i] : Vec3{}, g.dynamic_mode ? tf.noise_delta[i] : 0.0,
        g.dynamic_mode ? tf.moving_avg[i] : 0.0, g.dynamic_mode ? tf.path_dist[i] : 0.0, centroid,
        static_cast<uint64_t>(i));
  }

  g.wcl_position_m = weighted_centroid(g.positions_raw, g.noise_raw_dbm);
  g.wcl_estimate = encode_angular(g.wcl_position_m, g.transform);
  g.target = encode_angular(g.jammer_position_m, g.transform);
  g.supernode_index = -1;
}

}  // namespace

NormalizationTransform GraphConfig::transform_for(const std::vector<Vec3>& positions,
                                                  int dims) const {
  return choose_transform(positions, dims >= 3, *this);
}

MeasurementGraph build_graph(const scenario::ScenarioInstance& inst, const GraphConfig& cfg) {
  return build_graph(inst.samples, inst, cfg);
}

MeasurementGraph build_graph(const std::vector<scenario::MeasurementSample>& samples,
                             const scenario::ScenarioInstance& inst, const GraphConfig& cfg) {
  MeasurementGraph g;
  g.dims = inst.dimensions;
  g.dynamic_mode = inst.topology == scenario::Topology::kTrajectory;
  g.jammer_position_m = inst.jammer.position;
  g.positions_raw.reserve(samples.size());
  g.noise_raw_dbm.reserve(samples.size());
  g.time_indices.reserve(samples.size());
  for (const auto& s : samples) {
    g.positions_raw.push_back(s.position);
    g.noise_raw_dbm.push_back(s.noise_dbm);
    g.time_indices.push_back(s.time_index);
  }
  g.transform = choose_transform(g.positions_raw, g.dynamic_mode, cfg);
  finalize_graph(g, cfg);
  return g;
}

void attach_supernode(MeasurementGraph& g, const GraphConfig& cfg) {
  const int n = g.num_measurement_nodes();
  if (n < 1) throw GraphConstructionError("attach_supernode: empty graph");
  if (g.supernode_index >= 0) throw GraphConstructionError("supernode already attached");

  const Vec3 super_pos = weighted_centroid(g.positions_raw, g.noise_raw_dbm);
  double wsum = 0.0;
  double super_noise = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = rf::dbm_to_mw(g.noise_raw_dbm[i]);
    super_noise += w * g.noise_raw_dbm[i];
    wsum += w;
  }
  super_noise /= wsum;

  std::vector<int> all_nodes(n);
  for (int i = 0; i < n; ++i) all_nodes[i] = i;
  Vec3 centroid;
  for (const Vec3& p : g.positions_raw) centroid += p;
  centroid = centroid / static_cast<double>(n);

  g.node_features.conservativeResize(n + 1, Eigen::NoChange);
  g.node_features.row(n) = feature_row(
      static_cast<int>(g.node_features.cols()), super_pos, super_noise, all_nodes,
      g.positions_raw, g.noise_raw_dbm, g.transform, cfg.features, g.dynamic_mode, Vec3{}, 0.0,
      0.0, 0.0, centroid, static_cast<uint64_t>(n));
  g.supernode_index = n;
  g.supernode_position_m = super_pos;
  g.supernode_noise_dbm = super_noise;

  if (cfg.supernode_edges != SupernodeEdges::kNone) {
    for (int i = 0; i < n; ++i) {
      const double d = distance(g.positions_raw[i], super_pos);
      const double nd = g.max_edge_distance_m > 0.0
                            ? std::clamp(d / g.max_edge_distance_m, 0.0, 1.0)
                            : 0.0;
      const double w = edge_weight(nd);
      g.edges.emplace_back(i, n);
      g.edge_weights.push_back(w);
      if (cfg.supernode_edges == SupernodeEdges::kUndirected) {
        g.edges.emplace_back(n, i);
        g.edge_weights.push_back(w);
      }
    }
  }
}

std::string to_string(Augmentation a) {
  switch (a) {
    case Augmentation::kDropNode: return "drop_node";
    case Augmentation::kFeatureNoise: return "feature_noise";
    case Augmentation::kCrop: return "crop";
    case Augmentation::kRotation: return "rotation";
  }
  throw std::logic_error("unreachable");
}

Augmentation augmentation_from_string(const std::string& s) {
  if (s == "drop_node") return Augmentation::kDropNode;
  if (s == "feature_noise") return Augmentation::kFeatureNoise;
  if (s == "crop") return Augmentation::kCrop;
  if (s == "rotation") return Augmentation::kRotation;
  throw std::invalid_argument("unknown augmentation: " + s);
}

namespace {

void keep_nodes(MeasurementGraph& g, const std::vector<int>& keep, const GraphConfig& cfg) {
  std::vector<Vec3> pos;
  std::vector<double> noise;
  std::vector<int> times;
  pos.reserve(keep.size());
  for (int i : keep) {
    pos.push_back(g.positions_raw[i]);
    noise.push_back(g.noise_raw_dbm[i]);
    times.push_back(g.time_indices[i]);
  }
  g.positions_raw = std::move(pos);
  g.noise_raw_dbm = std::move(noise);
  g.time_indices = std::move(times);
  finalize_graph(g, cfg);
}

void drop_node(MeasurementGraph& g, double p, Rng& rng, const GraphConfig& cfg) {
  const int n = g.num_measurement_nodes();
  if (n <= 3 || p <= 0.0) return;
  std::vector<int> keep;
  for (int attempt = 0; attempt < 100; ++attempt) {
    keep.clear();
    for (int i = 0; i < n; ++i) {
      if (!rng.bernoulli(p)) keep.push_back(i);
    }
    if (static_cast<int>(keep.size()) >= 3) break;
    keep.clear();
  }
  if (keep.empty() || static_cast<int>(keep.size()) == n) return;
  keep_nodes(g, keep, cfg);
}

void feature_noise(MeasurementGraph& g, double p, Rng& rng, const GraphConfig&) {
  const int f = static_cast<int>(g.node_features.cols());
  const int n = static_cast<int>(g.node_features.rows());
  if (n < 3 || p <= 0.0) return;
  std::vector<int> columns(f);
  for (int c = 0; c < f; ++c) columns[c] = c;
  rng.shuffle(columns);
  const int count = rng.uniform_int(1, std::max(1, f / 2));
  for (int ci = 0; ci < count; ++ci) {
    const int c = columns[ci];
    const double range = g.node_features.col(c).maxCoeff() - g.node_features.col(c).minCoeff();
    if (range <= 0.0) continue;
    for (int i = 0; i < n; ++i) {
      if (rng.bernoulli(p)) g.node_features(i, c) += rng.normal(0.0, 0.1 * range);
    }
  }
}

void crop(MeasurementGraph& g, Rng& rng, const GraphConfig& cfg) {
  const int n = g.num_measurement_nodes();
  if (n <= 3) return;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (g.noise_raw_dbm[a] != g.noise_raw_dbm[b]) return g.noise_raw_dbm[a] > g.noise_raw_dbm[b];
    return a < b;
  });
  std::vector<int> anchors{order[0], order[1], order[2], rng.uniform_int(0, n - 1)};
  Vec3 lo = g.positions_raw[anchors[0]];
  Vec3 hi = lo;
  for (int a : anchors) {
    const Vec3& p = g.positions_raw[a];
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    const Vec3& p = g.positions_raw[i];
    if (p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z) {
      keep.push_back(i);
    }
  }
  if (static_cast<int>(keep.size()) == n || static_cast<int>(keep.size()) < 3) return;
  keep_nodes(g, keep, cfg);
}

}  // namespace

void rotate_graph(MeasurementGraph& g, double angle_rad, const GraphConfig& cfg) {
  const Vec3 center = g.transform.center();
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  for (Vec3& p : g.positions_raw) {
    const double dx = p.x - center.x;
    const double dy = p.y - center.y;
    p.x = center.x + c * dx - s * dy;
    p.y = center.y + s * dx + c * dy;
  }
  const Vec3 d = g.jammer_position_m - center;
  g.jammer_position_m = {center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y,
                         g.jammer_position_m.z};
  finalize_graph(g, cfg);
}

void augment(MeasurementGraph& g, Augmentation kind, double p, Rng& rng, const GraphConfig& cfg) {
  if (g.supernode_index >= 0) {
    throw GraphConstructionError("augment must run before attach_supernode");
  }
  if (g.num_measurement_nodes() < 3) return;
  switch (kind) {
    case Augmentation::kDropNode:
      drop_node(g, p, rng, cfg);
      return;
    case Augmentation::kFeatureNoise:
      feature_noise(g, p, rng, cfg);
      return;
    case Augmentation::kCrop:
      if (rng.bernoulli(p)) crop(g, rng, cfg);
      return;
    case Augmentation::kRotation:
      if (rng.bernoulli(p)) rotate_graph(g, rng.uniform(0.0, 2.0 * M_PI), cfg);
      return;
  }
}

scenario::ScenarioInstance trajectory_crop(const scenario::ScenarioInstance& inst, Rng& rng,
                                           double detect_threshold_dbm) {
  const int n = static_cast<int>(inst.samples.size());
  if (n < 3) return inst;
  for (int attempt = 0; attempt < 100; ++attempt) {
    int a = rng.uniform_int(0, n - 1);
    int b = rng.uniform_int(0, n - 1);
    if (a > b) std::swap(a, b);
    int detected = 0;
    for (int i = a; i <= b && detected < 3; ++i) {
      if (inst.samples[i].noise_dbm >= detect_threshold_dbm) ++detected;
    }
    if (detected >= 3) {
      scenario::ScenarioInstance cropped = inst;
      cropped.samples.assign(inst.samples.begin() + a, inst.samples.begin() + b + 1);
      return cropped;
    }
  }
  return inst;
}

}  // namespace jamloc::graph
