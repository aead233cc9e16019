#pragma once

#include <array>
#include <memory>

#include "jamloc/classical.hpp"
#include "jamloc/gnn/train.hpp"

namespace jamloc::eval {

struct InstanceRecord {
  int instance_index = 0;
  int checkpoint_nodes = 0;  ///< prefix length for trajectory checkpoints, 0 for static
  double error_m = 0.0;
  scenario::Topology topology = scenario::Topology::kRandom;
  scenario::Placement placement = scenario::Placement::kNotApplicable;
  double min_jammer_distance_m = 0.0;
  double max_noise_dbm = -200.0;
  bool fallback = false;
  std::optional<std::array<double, 5>> alpha;
  // instance metadata, kept for parameter-sweep re-splits
  double sigma_db = 0.0;
  double tx_power_dbm = 0.0;
  int node_count = 0;
};

struct Aggregate {
  double rmse = 0.0;
  double mae = 0.0;
  long count = 0;
};

Aggregate aggregate_errors(const std::vector<double>& errors);

struct EvalReport {
  std::string estimator;
  std::string mode;  ///< "static" or "dynamic"
  std::vector<InstanceRecord> records;
  /// Ordered (split name, aggregate) pairs; "all" is always present.
  std::vector<std::pair<std::string, Aggregate>> splits;
  /// Dynamic only: per-trajectory RMSE/MAE averaged across trajectories.
  double trajectory_mean_rmse = 0.0;
  double trajectory_mean_mae = 0.0;

  uint64_t dataset_hash = 0;
  uint64_t model_hash = 0;
  int checkpoint_stride = 0;

  const Aggregate* find_split(const std::string& name) const;
  void write_records_csv(const std::string& path) const;
  void write_summary_csv(const std::string& path) const;
};

/// Position estimator over a sample set; classical methods and trained models
/// share this surface.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string name() const = 0;
  virtual classical::EstimateResult estimate(
      const std::vector<scenario::MeasurementSample>& samples,
      const scenario::ScenarioInstance& inst) = 0;
};

std::unique_ptr<Estimator> make_estimator(classical::EstimatorKind kind);
std::unique_ptr<Estimator> make_estimator(const gnn::TrainedModel& tm);
/// Decodes the raw regression branch instead of the blended estimate.
std::unique_ptr<Estimator> make_estimator_gnn_branch(const gnn::TrainedModel& tm);

/// Per-instance Euclidean error (in the instance's dimensionality) aggregated
/// by topology and placement.
EvalReport evaluate_static(Estimator& est, const std::vector<scenario::ScenarioInstance>& data);

struct DynamicEvalOptions {
  sampling::DownsampleConfig downsample;
  int checkpoint_stride = 50;
};

/// Prefix evaluation along downsampled trajectories, bucketed by the minimum
/// jammer distance observed so far.
EvalReport evaluate_dynamic(Estimator& est, const std::vector<scenario::ScenarioInstance>& data,
                            const DynamicEvalOptions& opts = {});

/// Distance buckets, nearest first: [0,50), [50,100), [100,200), [200,500),
/// [500, inf). Half-open, so every checkpoint lands in exactly one.
constexpr int kNumBuckets = 5;
int distance_bucket(double min_distance_m);
std::string bucket_name(int bucket);

struct ConfidencePoint {
  double min_distance_m = 0.0;
  std::array<double, 5> alpha{};
};

struct ConfidenceProfile {
  std::vector<ConfidencePoint> points;
  std::array<std::array<double, 5>, kNumBuckets> bucket_alpha{};  ///< [bucket][component]
  std::array<double, kNumBuckets> bucket_alpha_mean{};
  std::array<long, kNumBuckets> bucket_count{};

  void write_csv(const std::string& path) const;
};

ConfidenceProfile confidence_profile(const gnn::TrainedModel& cage,
                                     const std::vector<scenario::ScenarioInstance>& data,
                                     const DynamicEvalOptions& opts = {});

enum class AblationKind { kK, kPooling, kAugmentation, kCageComponents, kDownsampling, kNodeFeatures };

AblationKind ablation_from_string(const std::string& s);

struct AblationCell {
  std::string label;
  double rmse = 0.0;
  double mae = 0.0;
  double rmse_gnn_branch = 0.0;  ///< cage-components grid only
  bool failed = false;
  std::string error;
};

struct AblationTable {
  std::string name;
  std::vector<AblationCell> cells;
  void write_csv(const std::string& path) const;
};

struct AblationOptions {
  gnn::ModelConfig base_model;
  gnn::TrainConfig base_train;
  graph::GraphConfig base_graph;
  DynamicEvalOptions dynamic_eval;
  std::vector<int> k_grid{3, 5, 7, 11};
  std::vector<gnn::Pooling> pooling_grid{gnn::Pooling::kSum, gnn::Pooling::kMean,
                                         gnn::Pooling::kMax, gnn::Pooling::kAttention};
  std::vector<int> downsample_sizes{200, 600, 800, 1000};
};

/// Trains and evaluates every cell of the requested grid with shared seeds.
/// Failed cells are recorded and the run continues.
AblationTable run_ablation(AblationKind kind, const std::vector<scenario::ScenarioInstance>& data,
                           const AblationOptions& opts);

/// Writes the figure-backed series of a report (and, when given, a confidence
/// profile) as CSV plus SVG renderings. Throws on an empty report.
void emit_plots(const EvalReport& report, const std::string& out_dir,
                const ConfidenceProfile* confidence = nullptr);

}  // namespace jamloc::eval
