#pragma once

#include <memory>

#include "jamloc/gnn/layers.hpp"

namespace jamloc::gnn {

struct ForwardOutput {
  Vector5 x_gnn = Vector5::Zero();
  Vector5 alpha = Vector5::Ones();
  Vector5 x_final = Vector5::Zero();
  bool has_confidence = false;
};

/// Graph regression model. Baseline architectures predict the position
/// five-tuple from a pooled readout; the confidence-fused variant blends that
/// prediction with the weighted-centroid prior through per-component weights
/// read off the supernode.
class Model {
 public:
  explicit Model(const ModelConfig& cfg);
  Model(const Model& other);
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  void init(Rng& rng) { params_.init_xavier(rng); }

  /// `wcl_encoded` is the angular encoding of the graph's WCL estimate; it is
  /// only consumed by the confidence-fused architecture.
  ForwardOutput forward(const MessageGraph& mg, const Eigen::MatrixXd& features,
                        const Vector5& wcl_encoded, bool training = false,
                        Rng* dropout_rng = nullptr);

  /// Accumulates parameter gradients for the preceding forward call. The three
  /// seeds are the loss gradients with respect to x_gnn, x_final and alpha;
  /// zero vectors are valid for unused paths.
  void backward(const MessageGraph& mg, const Vector5& d_x_gnn, const Vector5& d_x_final,
                const Vector5& d_alpha);

  /// Attention coefficients per GAT layer from the last forward (test hook).
  std::vector<const std::vector<std::vector<std::vector<double>>>*> attention_layers() const;

 private:
  Eigen::MatrixXd run_layers(const MessageGraph& mg, const Eigen::MatrixXd& features);
  Eigen::MatrixXd run_layers_backward(const MessageGraph& mg, const Eigen::MatrixXd& grad);

  ModelConfig cfg_;
  ParamStore params_;

  std::vector<GatLayer> gat_layers_;
  std::vector<GcnLayer> gcn_layers_;
  std::vector<PnaLayer> pna_layers_;
  std::vector<NodeMlpLayer> mlp_layers_;

  std::unique_ptr<PoolingModule> reg_pool_;
  std::unique_ptr<PoolingModule> conf_pool_;
  std::unique_ptr<LinearHead> reg_head_;
  std::unique_ptr<ConfidenceModule> conf_head_;
  DropoutModule reg_dropout_;
  DropoutModule conf_dropout_;

  // forward caches
  Eigen::MatrixXd embeddings_;
  ForwardOutput out_;
  Vector5 wcl_encoded_;
  Eigen::VectorXd conf_logits_;
  int conf_source_row_ = -1;
  int reg_excluded_row_ = -1;
};

struct LossGrads {
  Vector5 d_x_gnn = Vector5::Zero();
  Vector5 d_x_final = Vector5::Zero();
  Vector5 d_alpha = Vector5::Zero();
};

struct LossTerms {
  double gnn = 0.0;      ///< squared five-tuple error of the raw prediction
  double adapt = 0.0;    ///< squared five-tuple error of the blended prediction
  double penalty = 0.0;  ///< squared deviation of alpha from one
};

LossTerms instance_loss(const ForwardOutput& out, const Vector5& target);

/// Scalar loss for one instance under the given objective. The penalty term is
/// summed (not averaged) over the batch, so `batch_size` scales only the main
/// terms.
double loss_value(const LossTerms& terms, LossKind kind, double lambda);

/// Gradients matching loss_value, pre-scaled for batch accumulation.
LossGrads loss_gradients(const ForwardOutput& out, const Vector5& target, LossKind kind,
                         double lambda, int batch_size);

}  // namespace jamloc::gnn
