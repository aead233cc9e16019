#include "jamloc/gnn/params.hpp"

#include <cmath>
#include <stdexcept>

namespace jamloc::gnn {

int ParamStore::add(const std::string& name, int rows, int cols) {
  Tensor t;
  t.name = name;
  t.value = Eigen::MatrixXd::Zero(rows, cols);
  t.grad = Eigen::MatrixXd::Zero(rows, cols);
  tensors_.push_back(std::move(t));
  return static_cast<int>(tensors_.size()) - 1;
}

size_t ParamStore::scalar_count() const {
  size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<size_t>(t.value.size());
  return n;
}

void ParamStore::zero_grads() {
  for (auto& t : tensors_) t.grad.setZero();
}

void ParamStore::init_xavier(Rng& rng) {
  for (auto& t : tensors_) {
    if (t.name.size() >= 2 && t.name.compare(t.name.size() - 2, 2, ".b") == 0) {
      t.value.setZero();
      continue;
    }
    const int fan_out = static_cast<int>(t.value.rows());
    const int fan_in = std::max<int>(1, static_cast<int>(t.value.cols()));
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (int r = 0; r < t.value.rows(); ++r) {
      for (int c = 0; c < t.value.cols(); ++c) t.value(r, c) = rng.uniform(-limit, limit);
    }
  }
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.tensors_.size() != tensors_.size()) {
    throw std::invalid_argument("ParamStore::copy_values_from: layout mismatch");
  }
  for (size_t i = 0; i < tensors_.size(); ++i) tensors_[i].value = other.tensors_[i].value;
}

void ParamStore::accumulate_grads_from(const ParamStore& other, double scale) {
  if (other.tensors_.size() != tensors_.size()) {
    throw std::invalid_argument("ParamStore::accumulate_grads_from: layout mismatch");
  }
  for (size_t i = 0; i < tensors_.size(); ++i) tensors_[i].grad += scale * other.tensors_[i].grad;
}

}  // namespace jamloc::gnn
