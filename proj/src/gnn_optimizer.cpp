#include "jamloc/gnn/optimizer.hpp"

#include <cmath>

namespace jamloc::gnn {

AdamW::AdamW(const ParamStore& store, double weight_decay, double beta1, double beta2, double eps)
    : weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& t : store.tensors()) {
    m_.push_back(Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols()));
    v_.push_back(Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols()));
  }
}

void AdamW::step(ParamStore& store, double learning_rate) {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (size_t i = 0; i < store.tensors().size(); ++i) {
    auto& t = store.tensors()[i];
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * t.grad;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * t.grad.cwiseProduct(t.grad);
    const Eigen::MatrixXd m_hat = m_[i] / bc1;
    const Eigen::MatrixXd v_hat = v_[i] / bc2;
    t.value -= learning_rate *
               (m_hat.array() / (v_hat.array().sqrt() + eps_) + weight_decay_ * t.value.array())
                   .matrix();
  }
}

double scheduled_lr(long step, long total_steps, double peak_lr, double warmup_fraction) {
  const long warmup = std::max<long>(1, static_cast<long>(warmup_fraction * total_steps));
  if (step < warmup) {
    return peak_lr * static_cast<double>(step) / static_cast<double>(warmup);
  }
  const double progress =
      static_cast<double>(step - warmup) / std::max<long>(1, total_steps - warmup);
  return peak_lr * 0.5 * (1.0 + std::cos(M_PI * std::min(1.0, progress)));
}

}  // namespace jamloc::gnn
