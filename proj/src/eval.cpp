#include "jamloc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "jamloc/plots.hpp"

namespace jamloc::eval {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t params_fingerprint(const gnn::ParamStore& store) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix_bytes = [&h](const void* data, size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& t : store.tensors()) {
    mix_bytes(t.value.data(), sizeof(double) * t.value.size());
  }
  return h;
}

}  // namespace

Aggregate aggregate_errors(const std::vector<double>& errors) {
  Aggregate a;
  a.count = static_cast<long>(errors.size());
  if (errors.empty()) return a;
  double sq = 0.0, abs = 0.0;
  for (double e : errors) {
    sq += e * e;
    abs += e;
  }
  a.rmse = std::sqrt(sq / static_cast<double>(errors.size()));
  a.mae = abs / static_cast<double>(errors.size());
  return a;
}

const Aggregate* EvalReport::find_split(const std::string& name) const {
  for (const auto& [n, agg] : splits) {
    if (n == name) return &agg;
  }
  return nullptr;
}

void EvalReport::write_records_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "instance,checkpoint_nodes,error_m,topology,placement,min_jammer_distance_m,"
         "max_noise_dbm,fallback,sigma_db,tx_power_dbm,node_count,alpha1,alpha2,alpha3,alpha4,"
         "alpha5\n";
  for (const auto& r : records) {
    out << r.instance_index << "," << r.checkpoint_nodes << "," << fmt(r.error_m) << ","
        << scenario::to_string(r.topology) << "," << scenario::to_string(r.placement) << ","
        << fmt(r.min_jammer_distance_m) << "," << fmt(r.max_noise_dbm) << ","
        << (r.fallback ? 1 : 0) << "," << fmt(r.sigma_db) << "," << fmt(r.tx_power_dbm) << ","
        << r.node_count;
    if (r.alpha) {
      for (double a : *r.alpha) out << "," << fmt(a);
    } else {
      out << ",,,,,";
    }
    out << "\n";
  }
}

void EvalReport::write_summary_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "estimator,mode,split,count,rmse_m,mae_m\n";
  for (const auto& [name, agg] : splits) {
    out << estimator << "," << mode << "," << name << "," << agg.count << "," << fmt(agg.rmse)
        << "," << fmt(agg.mae) << "\n";
  }
  if (mode == "dynamic") {
    out << estimator << "," << mode << ",trajectory_mean," << records.size() << ","
        << fmt(trajectory_mean_rmse) << "," << fmt(trajectory_mean_mae) << "\n";
  }
}

namespace {

class ClassicalEstimator : public Estimator {
 public:
  explicit ClassicalEstimator(classical::EstimatorKind kind) : kind_(kind) {}
  std::string name() const override { return classical::to_string(kind_); }
  classical::EstimateResult estimate(const std::vector<scenario::MeasurementSample>& samples,
                                     const scenario::ScenarioInstance&) override {
    return classical::estimate(kind_, samples);
  }

 private:
  classical::EstimatorKind kind_;
};

class ModelEstimator : public Estimator {
 public:
  ModelEstimator(const gnn::TrainedModel& tm, bool gnn_branch_only)
      : tm_(tm), gnn_branch_only_(gnn_branch_only) {
    // Evaluation reuses the model object; graphs arrive pre-downsampled.
  }

  std::string name() const override {
    std::string n = to_string(tm_.model_config.arch);
    if (gnn_branch_only_) n += "(gnn-branch)";
    return n;
  }

  uint64_t fingerprint() const { return params_fingerprint(tm_.model->params()); }

  classical::EstimateResult estimate(const std::vector<scenario::MeasurementSample>& samples,
                                     const scenario::ScenarioInstance& inst) override {
    graph::MeasurementGraph g = graph::build_graph(samples, inst, tm_.graph_config);
    if (tm_.graph_config.use_supernode) graph::attach_supernode(g, tm_.graph_config);
    const gnn::MessageGraph mg = gnn::MessageGraph::from(g);
    const gnn::ForwardOutput out =
        tm_.model->forward(mg, g.node_features, g.wcl_estimate.vec());
    const gnn::Vector5 chosen = gnn_branch_only_ ? out.x_gnn : out.x_final;
    classical::EstimateResult result;
    result.position_m = graph::decode_angular(graph::AngularPosition::from_vec(chosen), g.transform);
    result.estimator = classical::EstimatorKind::kModel;
    if (out.has_confidence) {
      result.confidence = {out.alpha[0], out.alpha[1], out.alpha[2], out.alpha[3], out.alpha[4]};
    }
    return result;
  }

 private:
  gnn::TrainedModel tm_;
  bool gnn_branch_only_;
};

}  // namespace

std::unique_ptr<Estimator> make_estimator(classical::EstimatorKind kind) {
  return std::make_unique<ClassicalEstimator>(kind);
}

std::unique_ptr<Estimator> make_estimator(const gnn::TrainedModel& tm) {
  return std::make_unique<ModelEstimator>(tm, /*gnn_branch_only=*/false);
}

std::unique_ptr<Estimator> make_estimator_gnn_branch(const gnn::TrainedModel& tm) {
  return std::make_unique<ModelEstimator>(tm, /*gnn_branch_only=*/true);
}

int distance_bucket(double d) {
  if (d < 50.0) return 0;
  if (d < 100.0) return 1;
  if (d < 200.0) return 2;
  if (d < 500.0) return 3;
  return 4;
}

std::string bucket_name(int bucket) {
  switch (bucket) {
    case 0: return "[50,0]";
    case 1: return "[100,50]";
    case 2: return "[200,100]";
    case 3: return "[500,200]";
    case 4: return ">500";
  }
  throw std::out_of_range("bucket");
}

EvalReport evaluate_static(Estimator& est, const std::vector<scenario::ScenarioInstance>& data) {
  EvalReport report;
  report.estimator = est.name();
  report.mode = "static";
  report.dataset_hash = scenario::dataset_fingerprint(data);
  if (auto* me = dynamic_cast<ModelEstimator*>(&est)) report.model_hash = me->fingerprint();

  for (size_t i = 0; i < data.size(); ++i) {
    const auto& inst = data[i];
    const classical::EstimateResult res = est.estimate(inst.samples, inst);
    InstanceRecord r;
    r.instance_index = static_cast<int>(i);
    r.error_m = distance(res.position_m, inst.jammer.position, inst.dimensions);
    r.topology = inst.topology;
    r.placement = inst.placement;
    r.fallback = res.fallback;
    r.alpha = res.confidence;
    r.sigma_db = inst.propagation.sigma_db;
    r.tx_power_dbm = inst.jammer.tx_power_dbm;
    r.node_count = static_cast<int>(inst.samples.size());
    double min_d = std::numeric_limits<double>::infinity();
    for (const auto& s : inst.samples) {
      min_d = std::min(min_d, distance(s.position, inst.jammer.position, inst.dimensions));
      r.max_noise_dbm = std::max(r.max_noise_dbm, s.noise_dbm);
    }
    r.min_jammer_distance_m = min_d;
    report.records.push_back(std::move(r));
  }

  auto collect = [&](auto&& pred) {
    std::vector<double> errs;
    for (const auto& r : report.records) {
      if (pred(r)) errs.push_back(r.error_m);
    }
    return aggregate_errors(errs);
  };
  const scenario::Topology topos[] = {scenario::Topology::kCircle, scenario::Topology::kTriangle,
                                      scenario::Topology::kRectangle, scenario::Topology::kRandom};
  for (scenario::Placement pl :
       {scenario::Placement::kInsideRegion, scenario::Placement::kOutsideRegion}) {
    const std::string pname = scenario::to_string(pl);
    for (scenario::Topology t : topos) {
      report.splits.emplace_back(pname + "/" + scenario::to_string(t),
                                 collect([&](const InstanceRecord& r) {
                                   return r.placement == pl && r.topology == t;
                                 }));
    }
    report.splits.emplace_back(
        pname, collect([&](const InstanceRecord& r) { return r.placement == pl; }));
  }
  report.splits.emplace_back("all", collect([](const InstanceRecord&) { return true; }));
  return report;
}

EvalReport evaluate_dynamic(Estimator& est, const std::vector<scenario::ScenarioInstance>& data,
                            const DynamicEvalOptions& opts) {
  EvalReport report;
  report.estimator = est.name();
  report.mode = "dynamic";
  report.dataset_hash = scenario::dataset_fingerprint(data);
  report.checkpoint_stride = opts.checkpoint_stride;
  if (auto* me = dynamic_cast<ModelEstimator*>(&est)) report.model_hash = me->fingerprint();

  std::vector<double> traj_rmse, traj_mae;
  for (size_t i = 0; i < data.size(); ++i) {
    const auto& inst = data[i];
    const auto nodes = sampling::downsample(inst.samples, opts.downsample);
    const int total = static_cast<int>(nodes.size());

    std::vector<int> checkpoints;
    for (int c = opts.checkpoint_stride; c <= total; c += opts.checkpoint_stride) {
      checkpoints.push_back(c);
    }
    if (checkpoints.empty() || checkpoints.back() != total) checkpoints.push_back(total);

    std::vector<double> traj_errors;
    double min_d = std::numeric_limits<double>::infinity();
    double max_noise = -std::numeric_limits<double>::infinity();
    int consumed = 0;
    for (int c : checkpoints) {
      for (; consumed < c; ++consumed) {
        min_d = std::min(min_d, distance(nodes[consumed].position, inst.jammer.position));
        max_noise = std::max(max_noise, nodes[consumed].noise_dbm);
      }
      const std::vector<scenario::MeasurementSample> prefix(nodes.begin(), nodes.begin() + c);
      const classical::EstimateResult res = est.estimate(prefix, inst);

      InstanceRecord r;
      r.instance_index = static_cast<int>(i);
      r.checkpoint_nodes = c;
      r.error_m = distance(res.position_m, inst.jammer.position, inst.dimensions);
      r.topology = inst.topology;
      r.placement = inst.placement;
      r.min_jammer_distance_m = min_d;
      r.max_noise_dbm = max_noise;
      r.fallback = res.fallback;
      r.alpha = res.confidence;
      r.sigma_db = inst.propagation.sigma_db;
      r.tx_power_dbm = inst.jammer.tx_power_dbm;
      r.node_count = c;
      traj_errors.push_back(r.error_m);
      report.records.push_back(std::move(r));
    }
    const Aggregate traj = aggregate_errors(traj_errors);
    traj_rmse.push_back(traj.rmse);
    traj_mae.push_back(traj.mae);
  }

  for (int b = kNumBuckets - 1; b >= 0; --b) {
    std::vector<double> errs;
    for (const auto& r : report.records) {
      if (distance_bucket(r.min_jammer_distance_m) == b) errs.push_back(r.error_m);
    }
    report.splits.emplace_back(bucket_name(b), aggregate_errors(errs));
  }
  std::vector<double> all_errs;
  for (const auto& r : report.records) all_errs.push_back(r.error_m);
  report.splits.emplace_back("all", aggregate_errors(all_errs));

  report.trajectory_mean_rmse = 0.0;
  report.trajectory_mean_mae = 0.0;
  for (size_t i = 0; i < traj_rmse.size(); ++i) {
    report.trajectory_mean_rmse += traj_rmse[i];
    report.trajectory_mean_mae += traj_mae[i];
  }
  if (!traj_rmse.empty()) {
    report.trajectory_mean_rmse /= static_cast<double>(traj_rmse.size());
    report.trajectory_mean_mae /= static_cast<double>(traj_mae.size());
  }
  return report;
}

ConfidenceProfile confidence_profile(const gnn::TrainedModel& cage,
                                     const std::vector<scenario::ScenarioInstance>& data,
                                     const DynamicEvalOptions& opts) {
  auto est = make_estimator(cage);
  const EvalReport report = evaluate_dynamic(*est, data, opts);

  ConfidenceProfile profile;
  std::array<std::array<double, 5>, kNumBuckets> sums{};
  std::array<long, kNumBuckets> counts{};
  for (const auto& r : report.records) {
    if (!r.alpha) {
      throw std::invalid_argument("confidence_profile: estimator produced no confidence vector");
    }
    profile.points.push_back({r.min_jammer_distance_m, *r.alpha});
    const int b = distance_bucket(r.min_jammer_distance_m);
    for (int c = 0; c < 5; ++c) sums[b][c] += (*r.alpha)[c];
    ++counts[b];
  }
  for (int b = 0; b < kNumBuckets; ++b) {
    profile.bucket_count[b] = counts[b];
    double total = 0.0;
    for (int c = 0; c < 5; ++c) {
      profile.bucket_alpha[b][c] = counts[b] > 0 ? sums[b][c] / counts[b] : 0.0;
      total += profile.bucket_alpha[b][c];
    }
    profile.bucket_alpha_mean[b] = counts[b] > 0 ? total / 5.0 : 0.0;
  }
  return profile;
}

void ConfidenceProfile::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "min_jammer_distance_m,alpha1,alpha2,alpha3,alpha4,alpha5\n";
  for (const auto& p : points) {
    out << fmt(p.min_distance_m);
    for (double a : p.alpha) out << "," << fmt(a);
    out << "\n";
  }
}

AblationKind ablation_from_string(const std::string& s) {
  if (s == "k") return AblationKind::kK;
  if (s == "pooling") return AblationKind::kPooling;
  if (s == "augmentation") return AblationKind::kAugmentation;
  if (s == "cage_components") return AblationKind::kCageComponents;
  if (s == "downsampling") return AblationKind::kDownsampling;
  if (s == "node_features") return AblationKind::kNodeFeatures;
  throw std::invalid_argument("unknown ablation grid: " + s);
}

void AblationTable::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "grid,cell,rmse_m,mae_m,rmse_gnn_branch_m,failed,error\n";
  for (const auto& c : cells) {
    out << name << "," << c.label << "," << fmt(c.rmse) << "," << fmt(c.mae) << ","
        << fmt(c.rmse_gnn_branch) << "," << (c.failed ? 1 : 0) << "," << c.error << "\n";
  }
}

namespace {

struct CellConfig {
  std::string label;
  gnn::ModelConfig model;
  gnn::TrainConfig train;
  graph::GraphConfig graph;
  bool report_gnn_branch = false;
};

AblationCell run_cell(const CellConfig& cell, const std::vector<scenario::ScenarioInstance>& data,
                      const DynamicEvalOptions& dyn_opts) {
  AblationCell out;
  out.label = cell.label;
  try {
    const bool dynamic = data.front().topology == scenario::Topology::kTrajectory;
    gnn::TrainedModel tm = gnn::train(cell.model, cell.train, cell.graph, data);
    auto est = make_estimator(tm);
    DynamicEvalOptions opts = dyn_opts;
    opts.downsample = cell.train.downsample;
    const EvalReport report =
        dynamic ? evaluate_dynamic(*est, data, opts) : evaluate_static(*est, data);
    if (dynamic) {
      out.rmse = report.trajectory_mean_rmse;
      out.mae = report.trajectory_mean_mae;
    } else {
      const Aggregate* all = report.find_split("all");
      out.rmse = all->rmse;
      out.mae = all->mae;
    }
    if (cell.report_gnn_branch) {
      auto branch_est = make_estimator_gnn_branch(tm);
      const EvalReport branch = dynamic ? evaluate_dynamic(*branch_est, data, opts)
                                        : evaluate_static(*branch_est, data);
      out.rmse_gnn_branch = dynamic ? branch.trajectory_mean_rmse
                                    : branch.find_split("all")->rmse;
    }
  } catch (const std::exception& e) {
    out.failed = true;
    out.error = e.what();
  }
  return out;
}

}  // namespace

AblationTable run_ablation(AblationKind kind, const std::vector<scenario::ScenarioInstance>& data,
                           const AblationOptions& opts) {
  AblationTable table;
  std::vector<CellConfig> cells;
  const CellConfig base{"base", opts.base_model, opts.base_train, opts.base_graph, false};

  switch (kind) {
    case AblationKind::kK: {
      table.name = "k";
      for (int k : opts.k_grid) {
        CellConfig c = base;
        c.label = "k=" + std::to_string(k);
        c.graph.k = k;
        cells.push_back(c);
      }
      break;
    }
    case AblationKind::kPooling: {
      table.name = "pooling";
      for (gnn::Pooling p : opts.pooling_grid) {
        CellConfig c = base;
        c.label = to_string(p);
        c.model.pooling = p;
        cells.push_back(c);
      }
      break;
    }
    case AblationKind::kAugmentation: {
      table.name = "augmentation";
      using A = graph::Augmentation;
      const std::vector<std::pair<std::string, std::vector<gnn::AugmentationSpec>>> grid = {
          {"none", {}},
          {"rotation", {{A::kRotation, 1.0}}},
          {"crop", {{A::kCrop, 1.0}}},
          {"drop_node", {{A::kDropNode, 0.2}}},
          {"feature_noise", {{A::kFeatureNoise, 0.5}}},
          {"crop+drop_node", {{A::kCrop, 1.0}, {A::kDropNode, 0.2}}},
          {"drop_node+feature_noise", {{A::kDropNode, 0.2}, {A::kFeatureNoise, 0.5}}},
          {"crop+feature_noise", {{A::kCrop, 1.0}, {A::kFeatureNoise, 0.5}}},
      };
      for (const auto& [label, augs] : grid) {
        CellConfig c = base;
        c.label = label;
        c.train.augmentations = augs;
        cells.push_back(c);
      }
      break;
    }
    case AblationKind::kCageComponents: {
      table.name = "cage_components";
      using SE = graph::SupernodeEdges;
      using CH = gnn::ConfidenceHead;
      using CI = gnn::ConfidenceInput;
      using RI = gnn::RegressorInput;
      using CO = gnn::ConfidenceOutput;
      using LK = gnn::LossKind;
      struct Row {
        const char* label;
        LK loss;
        bool supernode;
        SE edges;
        CH head;
        CI conf_in;
        RI reg_in;
        CO conf_out;
      };
      const Row rows[] = {
          {"gnn_only", LK::kGnn, false, SE::kNone, CH::kLinear, CI::kSupernode,
           RI::kPooledWithoutSupernode, CO::kSingle},
          {"adapt/undirected/linear/sn/single", LK::kAdapt, true, SE::kUndirected, CH::kLinear,
           CI::kSupernode, RI::kPooledWithoutSupernode, CO::kSingle},
          {"adapt/undirected/linear/pooled+sn/single", LK::kAdapt, true, SE::kUndirected,
           CH::kLinear, CI::kPooledWithSupernode, RI::kPooledWithSupernode, CO::kSingle},
          {"adapt/no_edges/linear/pooled+sn/single", LK::kAdapt, true, SE::kNone, CH::kLinear,
           CI::kPooledWithSupernode, RI::kPooledWithSupernode, CO::kSingle},
          {"adapt/no_edges/linear/sn/single", LK::kAdapt, true, SE::kNone, CH::kLinear,
           CI::kSupernode, RI::kPooledWithoutSupernode, CO::kSingle},
          {"adapt/directed/linear/sn/single", LK::kAdapt, true, SE::kDirected, CH::kLinear,
           CI::kSupernode, RI::kPooledWithoutSupernode, CO::kSingle},
          {"adapt/directed/mlp/sn/single", LK::kAdapt, true, SE::kDirected, CH::kMlp3,
           CI::kSupernode, RI::kPooledWithoutSupernode, CO::kSingle},
          {"adapt/directed/mlp/sn/multiple", LK::kAdapt, true, SE::kDirected, CH::kMlp3,
           CI::kSupernode, RI::kPooledWithoutSupernode, CO::kMultiple},
          {"cage/directed/mlp/sn/single", LK::kCage, true, SE::kDirected, CH::kMlp3,
           CI::kSupernode, RI::kPooledWithoutSupernode, CO::kSingle},
          {"cage/directed/mlp/sn/multiple", LK::kCage, true, SE::kDirected, CH::kMlp3,
           CI::kSupernode, RI::kPooledWithoutSupernode, CO::kMultiple},
      };
      for (const Row& row : rows) {
        CellConfig c = base;
        c.label = row.label;
        c.model.arch = row.supernode ? gnn::Arch::kCage : gnn::Arch::kGat;
        c.model.conf_head = row.head;
        c.model.conf_in = row.conf_in;
        c.model.reg_in = row.reg_in;
        c.model.conf_out = row.conf_out;
        c.train.loss = row.supernode ? row.loss : gnn::LossKind::kGnn;
        c.graph.supernode_edges = row.edges;
        c.report_gnn_branch = row.supernode;
        cells.push_back(c);
      }
      break;
    }
    case AblationKind::kDownsampling: {
      table.name = "downsampling";
      for (auto method : {sampling::DownsampleMethod::kWindowAveraging,
                          sampling::DownsampleMethod::kSpatialBinning}) {
        for (int v : opts.downsample_sizes) {
          CellConfig c = base;
          c.label = sampling::to_string(method) + "/" + std::to_string(v);
          c.train.downsample.method = method;
          c.train.downsample.target_nodes = v;
          cells.push_back(c);
        }
      }
      break;
    }
    case AblationKind::kNodeFeatures: {
      table.name = "node_features";
      graph::FeatureMask mask;
      mask.cartesian = mask.neighbor_median = mask.neighbor_max = mask.noise_deviation = false;
      mask.weighted_centroid = mask.centroid_distance = false;
      mask.direction = mask.temporal_delta = false;
      struct Step {
        const char* label;
        std::function<void(graph::FeatureMask&)> enable;
        bool keep;
      };
      const bool dynamic = data.front().topology == scenario::Topology::kTrajectory;
      std::vector<Step> steps = {
          {"baseline", [](graph::FeatureMask&) {}, true},
          {"+cartesian", [](graph::FeatureMask& m) { m.cartesian = true; }, true},
          {"+centroid_distance", [](graph::FeatureMask& m) { m.centroid_distance = true; }, true},
          {"+weighted_centroid", [](graph::FeatureMask& m) { m.weighted_centroid = true; }, true},
          {"+azimuth_to_centroid", [](graph::FeatureMask& m) { m.azimuth_to_centroid = true; },
           false},
          {"+azimuth_to_wc", [](graph::FeatureMask& m) { m.azimuth_to_wc = true; }, false},
          {"+neighbor_median", [](graph::FeatureMask& m) { m.neighbor_median = true; }, true},
          {"+neighbor_max", [](graph::FeatureMask& m) { m.neighbor_max = true; }, true},
          {"+noise_deviation", [](graph::FeatureMask& m) { m.noise_deviation = true; }, true},
          {"+random_feature", [](graph::FeatureMask& m) { m.random_feature = true; }, false},
      };
      if (dynamic) {
        steps.push_back({"+moving_average", [](graph::FeatureMask& m) { m.moving_average = true; },
                         false});
        steps.push_back({"+path_distance", [](graph::FeatureMask& m) { m.path_distance = true; },
                         false});
        steps.push_back({"+direction", [](graph::FeatureMask& m) { m.direction = true; }, true});
        steps.push_back({"+temporal_delta",
                         [](graph::FeatureMask& m) { m.temporal_delta = true; }, true});
      }
      for (const Step& step : steps) {
        graph::FeatureMask trial = mask;
        step.enable(trial);
        CellConfig c = base;
        c.label = step.label;
        c.graph.features = trial;
        cells.push_back(c);
        if (step.keep) mask = trial;
      }
      break;
    }
  }

  for (const CellConfig& cell : cells) {
    table.cells.push_back(run_cell(cell, data, opts.dynamic_eval));
  }
  return table;
}

namespace {

plots::Series binned_rmse_series(const std::vector<InstanceRecord>& records,
                                 const std::string& label,
                                 const std::function<double(const InstanceRecord&)>& key,
                                 const std::vector<double>& edges) {
  plots::Series s;
  s.label = label;
  for (size_t b = 0; b + 1 < edges.size(); ++b) {
    std::vector<double> errs;
    for (const auto& r : records) {
      const double v = key(r);
      if (v >= edges[b] && v < edges[b + 1]) errs.push_back(r.error_m);
    }
    if (errs.empty()) continue;
    s.x.push_back(0.5 * (edges[b] + edges[b + 1]));
    s.y.push_back(aggregate_errors(errs).rmse);
  }
  return s;
}

}  // namespace

void emit_plots(const EvalReport& report, const std::string& out_dir,
                const ConfidenceProfile* confidence) {
  if (report.records.empty()) {
    std::string missing;
    for (const auto& [name, agg] : report.splits) {
      if (agg.count == 0) missing += (missing.empty() ? "" : ", ") + name;
    }
    throw std::invalid_argument("emit_plots: empty report; missing splits: " +
                                (missing.empty() ? std::string("all") : missing));
  }
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string base = out_dir + "/";
  report.write_records_csv(base + "records.csv");
  report.write_summary_csv(base + "summary.csv");

  auto emit = [&](const std::string& stem, const std::string& xl, const std::string& yl,
                  const std::vector<plots::Series>& series) {
    plots::write_series_csv(base + stem + ".csv", xl, yl, series);
    plots::write_svg_line_chart(base + stem + ".svg", stem, xl, yl, series);
  };

  if (report.mode == "dynamic") {
    plots::Series dist = binned_rmse_series(
        report.records, report.estimator,
        [](const InstanceRecord& r) { return r.min_jammer_distance_m; },
        {0, 50, 100, 200, 500, 1e9});
    emit("error_vs_min_distance", "min_jammer_distance_m", "rmse_m", {dist});
    plots::Series noise = binned_rmse_series(
        report.records, report.estimator,
        [](const InstanceRecord& r) { return r.max_noise_dbm; },
        {-100, -90, -80, -70, -60, -50, -40, -30, -20, -10, 0, 40});
    emit("error_vs_max_noise", "max_noise_dbm", "rmse_m", {noise});
  } else {
    plots::Series sigma = binned_rmse_series(
        report.records, report.estimator, [](const InstanceRecord& r) { return r.sigma_db; },
        {2, 3, 4, 5, 6.0001});
    emit("error_vs_sigma", "shadowing_sigma_db", "rmse_m", {sigma});
    plots::Series power = binned_rmse_series(
        report.records, report.estimator, [](const InstanceRecord& r) { return r.tx_power_dbm; },
        {20, 30, 40, 50, 60.0001});
    emit("error_vs_tx_power", "jammer_tx_power_dbm", "rmse_m", {power});
    plots::Series nodes = binned_rmse_series(
        report.records, report.estimator,
        [](const InstanceRecord& r) { return static_cast<double>(r.node_count); },
        {3, 20, 40, 70, 130});
    emit("error_vs_node_count", "node_count", "rmse_m", {nodes});
  }

  if (confidence != nullptr) {
    confidence->write_csv(base + "confidence_profile.csv");
    std::vector<plots::Series> comp(5);
    for (int c = 0; c < 5; ++c) {
      comp[c].label = "alpha" + std::to_string(c + 1);
      for (int b = kNumBuckets - 1; b >= 0; --b) {
        if (confidence->bucket_count[b] == 0) continue;
        const double mid[] = {25, 75, 150, 350, 700};
        comp[c].x.push_back(mid[b]);
        comp[c].y.push_back(confidence->bucket_alpha[b][c]);
      }
    }
    emit("confidence_vs_distance", "min_jammer_distance_m", "alpha", comp);
  }
}

}  // namespace jamloc::eval
