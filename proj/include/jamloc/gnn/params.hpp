#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jamloc/rng.hpp"

namespace jamloc::gnn {

struct Tensor {
  std::string name;
  Eigen::MatrixXd value;
  Eigen::MatrixXd grad;
};

/// Flat registry of learnable tensors; layers hold indices into it. Keeps
/// optimizer state, serialization and finite-difference sweeps trivial.
class ParamStore {
 public:
  int add(const std::string& name, int rows, int cols);

  Tensor& at(int id) { return tensors_[id]; }
  const Tensor& at(int id) const { return tensors_[id]; }
  Eigen::MatrixXd& value(int id) { return tensors_[id].value; }
  const Eigen::MatrixXd& value(int id) const { return tensors_[id].value; }
  Eigen::MatrixXd& grad(int id) { return tensors_[id].grad; }

  size_t count() const { return tensors_.size(); }
  size_t scalar_count() const;

  void zero_grads();
  /// Symmetric fan-based uniform init for weight matrices; vectors treated as
  /// fan_out = 1, biases (names ending in ".b") start at zero.
  void init_xavier(Rng& rng);

  void copy_values_from(const ParamStore& other);
  void accumulate_grads_from(const ParamStore& other, double scale = 1.0);

  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

 private:
  std::vector<Tensor> tensors_;
};

}  // namespace jamloc::gnn
