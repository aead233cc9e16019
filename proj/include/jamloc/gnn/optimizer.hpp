#pragma once

#include <vector>

#include "jamloc/gnn/params.hpp"

namespace jamloc::gnn {

/// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(const ParamStore& store, double weight_decay = 1e-5, double beta1 = 0.9,
        double beta2 = 0.999, double eps = 1e-8);

  void step(ParamStore& store, double learning_rate);

 private:
  double weight_decay_, beta1_, beta2_, eps_;
  long step_count_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

/// Linear warmup to the peak over the first `warmup_fraction` of steps, then
/// cosine decay to zero.
double scheduled_lr(long step, long total_steps, double peak_lr, double warmup_fraction);

}  // namespace jamloc::gnn
