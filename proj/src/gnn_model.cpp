#include "jamloc/gnn/model.hpp"

#include <cmath>

namespace jamloc::gnn {

std::string to_string(Arch a) {
  switch (a) {
    case Arch::kMlp: return "mlp";
    case Arch::kGcn: return "gcn";
    case Arch::kGat: return "gat";
    case Arch::kPna: return "pna";
    case Arch::kCage: return "cage";
  }
  throw std::logic_error("unreachable");
}

std::string to_string(Pooling p) {
  switch (p) {
    case Pooling::kSum: return "sum";
    case Pooling::kMean: return "mean";
    case Pooling::kMax: return "max";
    case Pooling::kAttention: return "attention";
  }
  throw std::logic_error("unreachable");
}

std::string to_string(LossKind l) {
  switch (l) {
    case LossKind::kGnn: return "gnn";
    case LossKind::kAdapt: return "adapt";
    case LossKind::kCage: return "cage";
  }
  throw std::logic_error("unreachable");
}

Arch arch_from_string(const std::string& s) {
  if (s == "mlp") return Arch::kMlp;
  if (s == "gcn") return Arch::kGcn;
  if (s == "gat") return Arch::kGat;
  if (s == "pna") return Arch::kPna;
  if (s == "cage") return Arch::kCage;
  throw std::invalid_argument("unknown arch: " + s);
}

Pooling pooling_from_string(const std::string& s) {
  if (s == "sum") return Pooling::kSum;
  if (s == "mean") return Pooling::kMean;
  if (s == "max") return Pooling::kMax;
  if (s == "attention") return Pooling::kAttention;
  throw std::invalid_argument("unknown pooling: " + s);
}

LossKind loss_from_string(const std::string& s) {
  if (s == "gnn") return LossKind::kGnn;
  if (s == "adapt") return LossKind::kAdapt;
  if (s == "cage") return LossKind::kCage;
  throw std::invalid_argument("unknown loss: " + s);
}

ModelConfig ModelConfig::defaults_for(Arch arch, int input_dim) {
  ModelConfig c;
  c.arch = arch;
  c.input_dim = input_dim;
  switch (arch) {
    case Arch::kMlp:
      c.layers = 8;
      c.hidden_dim = 128;
      c.out_dim = 64;
      c.dropout = 0.5;
      break;
    case Arch::kGcn:
      c.layers = 2;
      c.hidden_dim = 512;
      c.out_dim = 256;
      c.dropout = 0.5;
      break;
    case Arch::kPna:
      c.layers = 6;
      c.hidden_dim = 64;
      c.out_dim = 64;
      c.dropout = 0.5;
      break;
    case Arch::kGat:
      c.layers = 8;
      c.hidden_dim = 128;
      c.out_dim = 128;
      c.heads = 4;
      c.dropout = 0.5;
      break;
    case Arch::kCage:
      c.layers = 8;
      c.hidden_dim = 128;
      c.out_dim = 128;
      c.heads = 4;
      c.dropout = 0.0;
      break;
  }
  return c;
}

TrainConfig TrainConfig::defaults_for(Arch arch) {
  TrainConfig t;
  switch (arch) {
    case Arch::kMlp:
      t.learning_rate = 4e-4;
      t.batch_size = 16;
      break;
    case Arch::kGcn:
      t.learning_rate = 5e-4;
      t.batch_size = 32;
      break;
    case Arch::kPna:
      t.learning_rate = 1e-3;
      t.batch_size = 128;
      break;
    case Arch::kGat:
    case Arch::kCage:
      t.learning_rate = 7e-4;
      t.batch_size = 8;
      break;
  }
  t.loss = arch == Arch::kCage ? LossKind::kCage : LossKind::kGnn;
  return t;
}

namespace {
Vector5 sigmoid5(const Eigen::VectorXd& logits) {
  Vector5 a;
  for (int i = 0; i < 5; ++i) {
    const double x = logits.size() == 1 ? logits[0] : logits[i];
    a[i] = 1.0 / (1.0 + std::exp(-x));
  }
  return a;
}
}  // namespace

Model::Model(const ModelConfig& cfg) : cfg_(cfg), reg_dropout_(cfg.dropout), conf_dropout_(cfg.dropout) {
  const int L = std::max(1, cfg_.layers);
  const bool attention_arch = cfg_.arch == Arch::kGat || cfg_.arch == Arch::kCage;

  if (attention_arch) {
    if (cfg_.hidden_dim % cfg_.heads != 0) {
      throw std::invalid_argument("hidden_dim must be divisible by the head count");
    }
    for (int l = 0; l < L; ++l) {
      const bool last = l == L - 1;
      const int in_dim = l == 0 ? cfg_.input_dim : cfg_.hidden_dim;
      const int head_dim = last ? cfg_.out_dim : cfg_.hidden_dim / cfg_.heads;
      gat_layers_.emplace_back(params_, "gat" + std::to_string(l), in_dim, head_dim, cfg_.heads,
                               /*average_heads=*/last, cfg_.leaky_slope);
    }
  } else if (cfg_.arch == Arch::kGcn) {
    for (int l = 0; l < L; ++l) {
      const int in_dim = l == 0 ? cfg_.input_dim : cfg_.hidden_dim;
      const int out_dim = l == L - 1 ? cfg_.out_dim : cfg_.hidden_dim;
      gcn_layers_.emplace_back(params_, "gcn" + std::to_string(l), in_dim, out_dim);
    }
  } else if (cfg_.arch == Arch::kPna) {
    for (int l = 0; l < L; ++l) {
      const int in_dim = l == 0 ? cfg_.input_dim : cfg_.hidden_dim;
      const int out_dim = l == L - 1 ? cfg_.out_dim : cfg_.hidden_dim;
      pna_layers_.emplace_back(params_, "pna" + std::to_string(l), in_dim, out_dim);
    }
  } else {
    for (int l = 0; l < L; ++l) {
      const int in_dim = l == 0 ? cfg_.input_dim : cfg_.hidden_dim;
      const int out_dim = l == L - 1 ? cfg_.out_dim : cfg_.hidden_dim;
      mlp_layers_.emplace_back(params_, "mlp" + std::to_string(l), in_dim, out_dim);
    }
  }

  reg_pool_ = std::make_unique<PoolingModule>(params_, "pool", cfg_.pooling, cfg_.out_dim);
  reg_head_ = std::make_unique<LinearHead>(params_, "reg", cfg_.out_dim, 5);
  if (cfg_.arch == Arch::kCage) {
    if (cfg_.conf_in == ConfidenceInput::kPooledWithSupernode) {
      conf_pool_ = std::make_unique<PoolingModule>(params_, "conf_pool", Pooling::kMax,
                                                   cfg_.out_dim);
    }
    const int conf_out = cfg_.conf_out == ConfidenceOutput::kSingle ? 1 : 5;
    conf_head_ = std::make_unique<ConfidenceModule>(params_, "conf", cfg_.conf_head, cfg_.out_dim,
                                                    conf_out);
  }
}

Model::Model(const Model& other) : Model(other.cfg_) {
  params_.copy_values_from(other.params_);
}

Eigen::MatrixXd Model::run_layers(const MessageGraph& mg, const Eigen::MatrixXd& features) {
  Eigen::MatrixXd h = features;
  for (auto& layer : gat_layers_) h = layer.forward(params_, mg, h);
  for (auto& layer : gcn_layers_) h = layer.forward(params_, mg, h);
  for (auto& layer : pna_layers_) h = layer.forward(params_, mg, h);
  for (auto& layer : mlp_layers_) h = layer.forward(params_, h);
  return h;
}

Eigen::MatrixXd Model::run_layers_backward(const MessageGraph& mg, const Eigen::MatrixXd& grad) {
  Eigen::MatrixXd g = grad;
  for (auto it = mlp_layers_.rbegin(); it != mlp_layers_.rend(); ++it) g = it->backward(params_, g);
  for (auto it = pna_layers_.rbegin(); it != pna_layers_.rend(); ++it) {
    g = it->backward(params_, mg, g);
  }
  for (auto it = gcn_layers_.rbegin(); it != gcn_layers_.rend(); ++it) {
    g = it->backward(params_, mg, g);
  }
  for (auto it = gat_layers_.rbegin(); it != gat_layers_.rend(); ++it) {
    g = it->backward(params_, mg, g);
  }
  return g;
}

ForwardOutput Model::forward(const MessageGraph& mg, const Eigen::MatrixXd& features,
                             const Vector5& wcl_encoded, bool training, Rng* dropout_rng) {
  if (cfg_.arch == Arch::kCage && mg.supernode < 0) {
    throw std::invalid_argument("confidence-fused model requires a graph with a supernode");
  }
  wcl_encoded_ = wcl_encoded;
  embeddings_ = run_layers(mg, features);

  reg_excluded_row_ = -1;
  if (mg.supernode >= 0 &&
      (cfg_.arch != Arch::kCage || cfg_.reg_in == RegressorInput::kPooledWithoutSupernode)) {
    reg_excluded_row_ = mg.supernode;
  }
  const Eigen::VectorXd pooled = reg_pool_->forward(params_, embeddings_, reg_excluded_row_);
  const Eigen::VectorXd pooled_dropped = reg_dropout_.forward(pooled, training, dropout_rng);
  out_ = ForwardOutput{};
  out_.x_gnn = reg_head_->forward(params_, pooled_dropped);
  out_.x_final = out_.x_gnn;

  if (cfg_.arch == Arch::kCage) {
    Eigen::VectorXd conf_input;
    if (cfg_.conf_in == ConfidenceInput::kSupernode) {
      conf_source_row_ = mg.supernode;
      conf_input = embeddings_.row(mg.supernode).transpose();
    } else {
      conf_source_row_ = -1;
      conf_input = conf_pool_->forward(params_, embeddings_, /*exclude_row=*/-1);
    }
    const Eigen::VectorXd conf_dropped = conf_dropout_.forward(conf_input, training, dropout_rng);
    conf_logits_ = conf_head_->forward(params_, conf_dropped);
    out_.alpha = sigmoid5(conf_logits_);
    out_.has_confidence = true;
    out_.x_final = out_.alpha.cwiseProduct(out_.x_gnn) +
                   (Vector5::Ones() - out_.alpha).cwiseProduct(wcl_encoded_);
  }
  return out_;
}

void Model::backward(const MessageGraph& mg, const Vector5& d_x_gnn, const Vector5& d_x_final,
                     const Vector5& d_alpha) {
  Vector5 gx = d_x_gnn;
  Eigen::MatrixXd grad_embeddings = Eigen::MatrixXd::Zero(embeddings_.rows(), embeddings_.cols());

  if (cfg_.arch == Arch::kCage) {
    gx += d_x_final.cwiseProduct(out_.alpha);
    Vector5 ga = d_alpha + d_x_final.cwiseProduct(out_.x_gnn - wcl_encoded_);
    // through the sigmoid
    Eigen::VectorXd glogits;
    if (cfg_.conf_out == ConfidenceOutput::kSingle) {
      glogits = Eigen::VectorXd::Zero(1);
      for (int i = 0; i < 5; ++i) glogits[0] += ga[i] * out_.alpha[i] * (1.0 - out_.alpha[i]);
    } else {
      glogits = Eigen::VectorXd::Zero(5);
      for (int i = 0; i < 5; ++i) glogits[i] = ga[i] * out_.alpha[i] * (1.0 - out_.alpha[i]);
    }
    Eigen::VectorXd gconf_input = conf_head_->backward(params_, glogits);
    gconf_input = conf_dropout_.backward(gconf_input);
    if (conf_source_row_ >= 0) {
      grad_embeddings.row(conf_source_row_) += gconf_input.transpose();
    } else {
      grad_embeddings += conf_pool_->backward(params_, gconf_input);
    }
  }

  Eigen::VectorXd gpooled = reg_head_->backward(params_, gx);
  gpooled = reg_dropout_.backward(gpooled);
  grad_embeddings += reg_pool_->backward(params_, gpooled);
  run_layers_backward(mg, grad_embeddings);
}

std::vector<const std::vector<std::vector<std::vector<double>>>*> Model::attention_layers() const {
  std::vector<const std::vector<std::vector<std::vector<double>>>*> out;
  for (const auto& layer : gat_layers_) out.push_back(&layer.attention());
  return out;
}

LossTerms instance_loss(const ForwardOutput& out, const Vector5& target) {
  LossTerms t;
  t.gnn = (target - out.x_gnn).squaredNorm();
  t.adapt = (target - out.x_final).squaredNorm();
  t.penalty = (Vector5::Ones() - out.alpha).squaredNorm();
  return t;
}

double loss_value(const LossTerms& terms, LossKind kind, double lambda) {
  switch (kind) {
    case LossKind::kGnn: return terms.gnn;
    case LossKind::kAdapt: return terms.adapt + lambda * terms.penalty;
    case LossKind::kCage: return 0.5 * (terms.gnn + terms.adapt) + lambda * terms.penalty;
  }
  throw std::logic_error("unreachable");
}

LossGrads loss_gradients(const ForwardOutput& out, const Vector5& target, LossKind kind,
                         double lambda, int batch_size) {
  const double inv_b = 1.0 / static_cast<double>(batch_size);
  LossGrads g;
  const Vector5 d_gnn = -2.0 * (target - out.x_gnn);
  const Vector5 d_final = -2.0 * (target - out.x_final);
  const Vector5 d_pen = -2.0 * lambda * (Vector5::Ones() - out.alpha);
  switch (kind) {
    case LossKind::kGnn:
      g.d_x_gnn = inv_b * d_gnn;
      break;
    case LossKind::kAdapt:
      g.d_x_final = inv_b * d_final;
      g.d_alpha = d_pen;  // summed over the batch, not averaged
      break;
    case LossKind::kCage:
      g.d_x_gnn = 0.5 * inv_b * d_gnn;
      g.d_x_final = 0.5 * inv_b * d_final;
      g.d_alpha = d_pen;
      break;
  }
  return g;
}

}  // namespace jamloc::gnn
