#pragma once

#include <cstdint>
#include <string>

#include "jamloc/graph.hpp"
#include "jamloc/sampling.hpp"

namespace jamloc::gnn {

enum class Arch { kMlp, kGcn, kGat, kPna, kCage };
enum class Pooling { kSum, kMean, kMax, kAttention };
enum class ConfidenceHead { kLinear, kMlp3 };
enum class ConfidenceInput { kSupernode, kPooledWithSupernode };
enum class RegressorInput { kPooledWithoutSupernode, kPooledWithSupernode };
enum class ConfidenceOutput { kSingle, kMultiple };
enum class LossKind { kGnn, kAdapt, kCage };

std::string to_string(Arch a);
std::string to_string(Pooling p);
std::string to_string(LossKind l);
Arch arch_from_string(const std::string& s);
Pooling pooling_from_string(const std::string& s);
LossKind loss_from_string(const std::string& s);

struct ModelConfig {
  Arch arch = Arch::kCage;
  int input_dim = 16;
  int layers = 8;
  int hidden_dim = 128;
  int out_dim = 128;
  int heads = 4;
  double dropout = 0.0;
  Pooling pooling = Pooling::kMax;
  double leaky_slope = 0.2;

  // Confidence-fusion options; relevant for arch == kCage only.
  ConfidenceHead conf_head = ConfidenceHead::kMlp3;
  ConfidenceInput conf_in = ConfidenceInput::kSupernode;
  RegressorInput reg_in = RegressorInput::kPooledWithoutSupernode;
  ConfidenceOutput conf_out = ConfidenceOutput::kMultiple;

  /// Tuned defaults per architecture (learning rate and batch size live in
  /// TrainConfig::defaults_for).
  static ModelConfig defaults_for(Arch arch, int input_dim);
};

struct AugmentationSpec {
  graph::Augmentation kind = graph::Augmentation::kDropNode;
  double p = 0.2;
};

struct TrainConfig {
  int epochs = 300;
  double learning_rate = 7e-4;
  double weight_decay = 1e-5;
  double warmup_fraction = 0.2;
  int batch_size = 8;
  uint64_t seed = 0;
  double val_fraction = 0.15;

  LossKind loss = LossKind::kCage;
  double lambda = 0.0;  ///< confidence penalty weight

  /// Applied in order to each training graph before the supernode is attached.
  std::vector<AugmentationSpec> augmentations{{graph::Augmentation::kDropNode, 0.2}};
  bool crop_trajectories = true;  ///< dynamic data only

  /// Applied to trajectory instances before graph construction.
  sampling::DownsampleConfig downsample;

  static TrainConfig defaults_for(Arch arch);
};

}  // namespace jamloc::gnn
