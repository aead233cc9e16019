#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "jamloc/gnn/config.hpp"
#include "jamloc/gnn/params.hpp"

namespace jamloc::gnn {

using Vector5 = Eigen::Matrix<double, 5, 1>;

/// Per-destination adjacency view consumed by the layers.
struct MessageGraph {
  int num_nodes = 0;
  int supernode = -1;
  std::vector<std::vector<std::pair<int, double>>> in_edges;  ///< per dst: (src, weight)

  static MessageGraph from(const graph::MeasurementGraph& g);
};

/// Attention denominator guard; keeps nodes with zero incoming weight mass
/// finite (their aggregate is then zero).
constexpr double kAttentionEps = 1e-16;

/// Edge-weighted multi-head attention layer. Hidden layers concatenate heads;
/// the final layer averages them. Forward caches activations for the matching
/// backward call (one instance in flight at a time).
class GatLayer {
 public:
  GatLayer(ParamStore& store, const std::string& prefix, int in_dim, int head_dim, int heads,
           bool average_heads, double leaky_slope);

  int out_dim() const { return average_heads_ ? head_dim_ : head_dim_ * heads_; }
  const Eigen::MatrixXd& forward(ParamStore& store, const MessageGraph& mg,
                                 const Eigen::MatrixXd& input);
  Eigen::MatrixXd backward(ParamStore& store, const MessageGraph& mg,
                           const Eigen::MatrixXd& grad_out);

  /// Attention rows from the last forward: [head][dst][edge index], parallel
  /// to mg.in_edges.
  const std::vector<std::vector<std::vector<double>>>& attention() const { return alpha_; }

 private:
  int in_dim_, head_dim_, heads_;
  bool average_heads_;
  double slope_;
  std::vector<int> w_, a_self_, a_neigh_;

  Eigen::MatrixXd input_, output_;
  std::vector<Eigen::MatrixXd> wh_, pre_act_;
  std::vector<std::vector<std::vector<double>>> alpha_, raw_logits_;
};

/// Degree-normalized convolution with implicit self-loops.
class GcnLayer {
 public:
  GcnLayer(ParamStore& store, const std::string& prefix, int in_dim, int out_dim);

  int out_dim() const { return out_dim_; }
  const Eigen::MatrixXd& forward(ParamStore& store, const MessageGraph& mg,
                                 const Eigen::MatrixXd& input);
  Eigen::MatrixXd backward(ParamStore& store, const MessageGraph& mg,
                           const Eigen::MatrixXd& grad_out);

 private:
  int in_dim_, out_dim_;
  int w_, b_;
  Eigen::MatrixXd input_, transformed_, pre_act_, output_;
  std::vector<double> inv_sqrt_deg_;
};

/// Multi-aggregator convolution: [self, mean, max, std] of transformed
/// neighbor features through a shared linear update.
class PnaLayer {
 public:
  PnaLayer(ParamStore& store, const std::string& prefix, int in_dim, int out_dim);

  int out_dim() const { return out_dim_; }
  const Eigen::MatrixXd& forward(ParamStore& store, const MessageGraph& mg,
                                 const Eigen::MatrixXd& input);
  Eigen::MatrixXd backward(ParamStore& store, const MessageGraph& mg,
                           const Eigen::MatrixXd& grad_out);

 private:
  static constexpr double kVarEps = 1e-9;
  int in_dim_, hidden_, out_dim_;
  int w_, u_, b_;
  Eigen::MatrixXd input_, transformed_, concat_, pre_act_, output_;
  Eigen::MatrixXd mean_, stddev_;
  std::vector<std::vector<int>> argmax_;
};

/// Shared per-node transform; ignores edges.
class NodeMlpLayer {
 public:
  NodeMlpLayer(ParamStore& store, const std::string& prefix, int in_dim, int out_dim);

  int out_dim() const { return out_dim_; }
  const Eigen::MatrixXd& forward(ParamStore& store, const Eigen::MatrixXd& input);
  Eigen::MatrixXd backward(ParamStore& store, const Eigen::MatrixXd& grad_out);

 private:
  int in_dim_, out_dim_;
  int w_, b_;
  Eigen::MatrixXd input_, pre_act_, output_;
};

/// Graph readout. Max/sum/mean are parameter-free; the attention variant is a
/// gated readout with a learned scalar gate per node.
class PoolingModule {
 public:
  PoolingModule(ParamStore& store, const std::string& prefix, Pooling kind, int dim);

  Eigen::VectorXd forward(ParamStore& store, const Eigen::MatrixXd& embeddings, int exclude_row);
  Eigen::MatrixXd backward(ParamStore& store, const Eigen::VectorXd& grad_pooled);

 private:
  Pooling kind_;
  int dim_;
  int gate_w_ = -1, gate_b_ = -1;
  Eigen::MatrixXd embeddings_;
  Eigen::VectorXd pooled_, gates_;
  std::vector<int> rows_, argmax_;
  double gate_denom_ = 0.0;
};

class LinearHead {
 public:
  LinearHead(ParamStore& store, const std::string& prefix, int in_dim, int out_dim);

  Eigen::VectorXd forward(ParamStore& store, const Eigen::VectorXd& input);
  Eigen::VectorXd backward(ParamStore& store, const Eigen::VectorXd& grad_out);

 private:
  int w_, b_;
  Eigen::VectorXd input_;
};

/// Confidence head: linear or 3-layer MLP producing pre-sigmoid logits.
class ConfidenceModule {
 public:
  ConfidenceModule(ParamStore& store, const std::string& prefix, ConfidenceHead kind, int in_dim,
                   int out_dim);

  Eigen::VectorXd forward(ParamStore& store, const Eigen::VectorXd& input);
  Eigen::VectorXd backward(ParamStore& store, const Eigen::VectorXd& grad_logits);

 private:
  ConfidenceHead kind_;
  std::vector<int> w_, b_;
  std::vector<Eigen::VectorXd> inputs_, pre_acts_;
};

/// Inverted dropout on a pooled vector; identity when p == 0 or not training.
class DropoutModule {
 public:
  explicit DropoutModule(double p) : p_(p) {}

  Eigen::VectorXd forward(const Eigen::VectorXd& input, bool training, Rng* rng);
  Eigen::VectorXd backward(const Eigen::VectorXd& grad_out) const;

 private:
  double p_;
  Eigen::VectorXd mask_;
};

}  // namespace jamloc::gnn
