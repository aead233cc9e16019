#pragma once

#include <memory>

#include "jamloc/gnn/model.hpp"
#include "jamloc/gnn/optimizer.hpp"

namespace jamloc::gnn {

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;
  double best_val_loss = std::numeric_limits<double>::infinity();
};

struct TrainedModel {
  ModelConfig model_config;
  graph::GraphConfig graph_config;
  TrainConfig train_config;
  std::shared_ptr<Model> model;
  TrainHistory history;
  uint64_t dataset_hash = 0;
};

/// Builds the evaluation-time graph for an instance: trajectory instances are
/// downsampled first, and the supernode is attached when the config asks for
/// one. No augmentation.
graph::MeasurementGraph prepare_graph(const scenario::ScenarioInstance& inst,
                                      const graph::GraphConfig& gcfg,
                                      const sampling::DownsampleConfig* downsample_cfg);
graph::MeasurementGraph prepare_graph(const std::vector<scenario::MeasurementSample>& samples,
                                      const scenario::ScenarioInstance& inst,
                                      const graph::GraphConfig& gcfg,
                                      const sampling::DownsampleConfig* downsample_cfg);

/// Input feature width for a dataset under a graph config.
int input_dim_for(const graph::GraphConfig& gcfg, bool dynamic_data);

/// Full training run: warmup/cosine schedule, per-epoch validation, best
/// checkpoint retention. Deterministic for a fixed seed. Throws TrainingError
/// on non-finite loss.
TrainedModel train(ModelConfig mcfg, TrainConfig tcfg, graph::GraphConfig gcfg,
                   const std::vector<scenario::ScenarioInstance>& data);

/// Checkpoint container: configs, parameter tensors and the run manifest.
void save_checkpoint(const TrainedModel& tm, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace jamloc::gnn
