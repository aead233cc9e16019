#include "jamloc/gnn/layers.hpp"

#include <cmath>

namespace jamloc::gnn {

MessageGraph MessageGraph::from(const graph::MeasurementGraph& g) {
  MessageGraph mg;
  mg.num_nodes = g.num_nodes();
  mg.supernode = g.supernode_index;
  mg.in_edges.resize(mg.num_nodes);
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [src, dst] = g.edges[e];
    mg.in_edges[dst].emplace_back(src, g.edge_weights[e]);
  }
  return mg;
}

namespace {
inline double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }
inline double leaky_grad(double x, double slope) { return x > 0.0 ? 1.0 : slope; }
}  // namespace

GatLayer::GatLayer(ParamStore& store, const std::string& prefix, int in_dim, int head_dim,
                   int heads, bool average_heads, double leaky_slope)
    : in_dim_(in_dim),
      head_dim_(head_dim),
      heads_(heads),
      average_heads_(average_heads),
      slope_(leaky_slope) {
  for (int h = 0; h < heads_; ++h) {
    const std::string hp = prefix + ".h" + std::to_string(h);
    w_.push_back(store.add(hp + ".W", head_dim_, in_dim_));
    a_self_.push_back(store.add(hp + ".a_self", head_dim_, 1));
    a_neigh_.push_back(store.add(hp + ".a_neigh", head_dim_, 1));
  }
}

const Eigen::MatrixXd& GatLayer::forward(ParamStore& store, const MessageGraph& mg,
                                         const Eigen::MatrixXd& input) {
  const int n = mg.num_nodes;
  input_ = input;
  wh_.assign(heads_, Eigen::MatrixXd());
  pre_act_.assign(heads_, Eigen::MatrixXd::Zero(n, head_dim_));
  alpha_.assign(heads_, std::vector<std::vector<double>>(n));
  raw_logits_.assign(heads_, std::vector<std::vector<double>>(n));
  output_ = Eigen::MatrixXd::Zero(n, out_dim());

  for (int h = 0; h < heads_; ++h) {
    wh_[h].noalias() = input * store.value(w_[h]).transpose();
    const Eigen::VectorXd self_score = wh_[h] * store.value(a_self_[h]);
    const Eigen::VectorXd neigh_score = wh_[h] * store.value(a_neigh_[h]);

    for (int i = 0; i < n; ++i) {
      const auto& edges = mg.in_edges[i];
      if (edges.empty()) continue;
      auto& raw = raw_logits_[h][i];
      auto& alpha = alpha_[h][i];
      raw.resize(edges.size());
      alpha.resize(edges.size());
      double max_logit = -std::numeric_limits<double>::infinity();
      for (size_t m = 0; m < edges.size(); ++m) {
        raw[m] = self_score[i] + neigh_score[edges[m].first];
        max_logit = std::max(max_logit, leaky(raw[m], slope_));
      }
      double denom = kAttentionEps;
      for (size_t m = 0; m < edges.size(); ++m) {
        alpha[m] = edges[m].second * std::exp(leaky(raw[m], slope_) - max_logit);
        denom += alpha[m];
      }
      for (size_t m = 0; m < edges.size(); ++m) {
        alpha[m] /= denom;
        pre_act_[h].row(i) += alpha[m] * wh_[h].row(edges[m].first);
      }
    }

    const Eigen::MatrixXd activated = pre_act_[h].cwiseMax(0.0);
    if (average_heads_) {
      output_ += activated / static_cast<double>(heads_);
    } else {
      output_.middleCols(h * head_dim_, head_dim_) = activated;
    }
  }
  return output_;
}

Eigen::MatrixXd GatLayer::backward(ParamStore& store, const MessageGraph& mg,
                                   const Eigen::MatrixXd& grad_out) {
  const int n = mg.num_nodes;
  Eigen::MatrixXd grad_input = Eigen::MatrixXd::Zero(n, in_dim_);

  for (int h = 0; h < heads_; ++h) {
    Eigen::MatrixXd gz;
    if (average_heads_) {
      gz = grad_out / static_cast<double>(heads_);
    } else {
      gz = grad_out.middleCols(h * head_dim_, head_dim_);
    }
    // ReLU gate
    gz = (pre_act_[h].array() > 0.0).cast<double>() * gz.array();

    Eigen::MatrixXd grad_wh = Eigen::MatrixXd::Zero(n, head_dim_);
    Eigen::VectorXd grad_self_score = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad_neigh_score = Eigen::VectorXd::Zero(n);

    for (int i = 0; i < n; ++i) {
      const auto& edges = mg.in_edges[i];
      if (edges.empty()) continue;
      const auto& alpha = alpha_[h][i];
      const auto& raw = raw_logits_[h][i];
      std::vector<double> galpha(edges.size());
      double weighted_sum = 0.0;
      for (size_t m = 0; m < edges.size(); ++m) {
        galpha[m] = gz.row(i).dot(wh_[h].row(edges[m].first));
        grad_wh.row(edges[m].first) += alpha[m] * gz.row(i);
        weighted_sum += alpha[m] * galpha[m];
      }
      for (size_t m = 0; m < edges.size(); ++m) {
        const double ge = alpha[m] * (galpha[m] - weighted_sum);
        const double gpre = leaky_grad(raw[m], slope_) * ge;
        grad_self_score[i] += gpre;
        grad_neigh_score[edges[m].first] += gpre;
      }
    }

    grad_wh.noalias() += grad_self_score * store.value(a_self_[h]).transpose();
    grad_wh.noalias() += grad_neigh_score * store.value(a_neigh_[h]).transpose();
    store.grad(a_self_[h]).noalias() += wh_[h].transpose() * grad_self_score;
    store.grad(a_neigh_[h]).noalias() += wh_[h].transpose() * grad_neigh_score;
    store.grad(w_[h]).noalias() += grad_wh.transpose() * input_;
    grad_input.noalias() += grad_wh * store.value(w_[h]);
  }
  return grad_input;
}

GcnLayer::GcnLayer(ParamStore& store, const std::string& prefix, int in_dim, int out_dim)
    : in_dim_(in_dim), out_dim_(out_dim) {
  w_ = store.add(prefix + ".W", out_dim_, in_dim_);
  b_ = store.add(prefix + ".b", out_dim_, 1);
}

const Eigen::MatrixXd& GcnLayer::forward(ParamStore& store, const MessageGraph& mg,
                                         const Eigen::MatrixXd& input) {
  const int n = mg.num_nodes;
  input_ = input;
  transformed_.noalias() = input * store.value(w_).transpose();
  inv_sqrt_deg_.resize(n);
  for (int i = 0; i < n; ++i) {
    double deg = 1.0;  // implicit self-loop
    for (const auto& [src, w] : mg.in_edges[i]) deg += w;
    inv_sqrt_deg_[i] = 1.0 / std::sqrt(deg);
  }
  pre_act_ = Eigen::MatrixXd::Zero(n, out_dim_);
  for (int i = 0; i < n; ++i) {
    pre_act_.row(i) = inv_sqrt_deg_[i] * inv_sqrt_deg_[i] * transformed_.row(i);
    for (const auto& [src, w] : mg.in_edges[i]) {
      pre_act_.row(i) += w * inv_sqrt_deg_[i] * inv_sqrt_deg_[src] * transformed_.row(src);
    }
    pre_act_.row(i) += store.value(b_).transpose();
  }
  output_ = pre_act_.cwiseMax(0.0);
  return output_;
}

Eigen::MatrixXd GcnLayer::backward(ParamStore& store, const MessageGraph& mg,
                                   const Eigen::MatrixXd& grad_out) {
  const int n = mg.num_nodes;
  const Eigen::MatrixXd gz = (pre_act_.array() > 0.0).cast<double>() * grad_out.array();
  store.grad(b_).noalias() += gz.colwise().sum().transpose();

  Eigen::MatrixXd grad_t = Eigen::MatrixXd::Zero(n, out_dim_);
  for (int i = 0; i < n; ++i) {
    grad_t.row(i) += inv_sqrt_deg_[i] * inv_sqrt_deg_[i] * gz.row(i);
    for (const auto& [src, w] : mg.in_edges[i]) {
      grad_t.row(src) += w * inv_sqrt_deg_[i] * inv_sqrt_deg_[src] * gz.row(i);
    }
  }
  store.grad(w_).noalias() += grad_t.transpose() * input_;
  return grad_t * store.value(w_);
}

PnaLayer::PnaLayer(ParamStore& store, const std::string& prefix, int in_dim, int out_dim)
    : in_dim_(in_dim), hidden_(out_dim), out_dim_(out_dim) {
  w_ = store.add(prefix + ".W", hidden_, in_dim_);
  u_ = store.add(prefix + ".U", out_dim_, 4 * hidden_);
  b_ = store.add(prefix + ".b", out_dim_, 1);
}

const Eigen::MatrixXd& PnaLayer::forward(ParamStore& store, const MessageGraph& mg,
                                         const Eigen::MatrixXd& input) {
  const int n = mg.num_nodes;
  input_ = input;
  transformed_.noalias() = input * store.value(w_).transpose();
  concat_ = Eigen::MatrixXd::Zero(n, 4 * hidden_);
  mean_ = Eigen::MatrixXd::Zero(n, hidden_);
  stddev_ = Eigen::MatrixXd::Zero(n, hidden_);
  argmax_.assign(n, std::vector<int>(hidden_, -1));

  for (int i = 0; i < n; ++i) {
    concat_.row(i).head(hidden_) = transformed_.row(i);
    const auto& edges = mg.in_edges[i];
    if (edges.empty()) continue;
    const double count = static_cast<double>(edges.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(hidden_);
    Eigen::VectorXd maxv =
        Eigen::VectorXd::Constant(hidden_, -std::numeric_limits<double>::infinity());
    for (const auto& [src, w] : edges) {
      mean += transformed_.row(src).transpose();
      for (int c = 0; c < hidden_; ++c) {
        if (transformed_(src, c) > maxv[c]) {
          maxv[c] = transformed_(src, c);
          argmax_[i][c] = src;
        }
      }
    }
    mean /= count;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(hidden_);
    for (const auto& [src, w] : edges) {
      const Eigen::VectorXd d = transformed_.row(src).transpose() - mean;
      var += d.cwiseProduct(d);
    }
    var /= count;
    const Eigen::VectorXd sd = (var.array() + kVarEps).sqrt();
    mean_.row(i) = mean.transpose();
    stddev_.row(i) = sd.transpose();
    concat_.row(i).segment(hidden_, hidden_) = mean.transpose();
    concat_.row(i).segment(2 * hidden_, hidden_) = maxv.transpose();
    concat_.row(i).segment(3 * hidden_, hidden_) = sd.transpose();
  }

  pre_act_.noalias() = concat_ * store.value(u_).transpose();
  pre_act_.rowwise() += store.value(b_).transpose().row(0);
  output_ = pre_act_.cwiseMax(0.0);
  return output_;
}

Eigen::MatrixXd PnaLayer::backward(ParamStore& store, const MessageGraph& mg,
                                   const Eigen::MatrixXd& grad_out) {
  const int n = mg.num_nodes;
  const Eigen::MatrixXd gz = (pre_act_.array() > 0.0).cast<double>() * grad_out.array();
  store.grad(b_).noalias() += gz.colwise().sum().transpose();
  store.grad(u_).noalias() += gz.transpose() * concat_;
  const Eigen::MatrixXd gcat = gz * store.value(u_);

  Eigen::MatrixXd grad_t = Eigen::MatrixXd::Zero(n, hidden_);
  for (int i = 0; i < n; ++i) {
    grad_t.row(i) += gcat.row(i).head(hidden_);
    const auto& edges = mg.in_edges[i];
    if (edges.empty()) continue;
    const double count = static_cast<double>(edges.size());
    const auto gmean = gcat.row(i).segment(hidden_, hidden_);
    const auto gmax = gcat.row(i).segment(2 * hidden_, hidden_);
    const auto gsd = gcat.row(i).segment(3 * hidden_, hidden_);
    for (const auto& [src, w] : edges) {
      grad_t.row(src) += gmean / count;
      for (int c = 0; c < hidden_; ++c) {
        grad_t(src, c) +=
            gsd[c] * (transformed_(src, c) - mean_(i, c)) / (count * stddev_(i, c));
      }
    }
    for (int c = 0; c < hidden_; ++c) {
      if (argmax_[i][c] >= 0) grad_t(argmax_[i][c], c) += gmax[c];
    }
  }
  store.grad(w_).noalias() += grad_t.transpose() * input_;
  return grad_t * store.value(w_);
}

NodeMlpLayer::NodeMlpLayer(ParamStore& store, const std::string& prefix, int in_dim, int out_dim)
    : in_dim_(in_dim), out_dim_(out_dim) {
  w_ = store.add(prefix + ".W", out_dim_, in_dim_);
  b_ = store.add(prefix + ".b", out_dim_, 1);
}

const Eigen::MatrixXd& NodeMlpLayer::forward(ParamStore& store, const Eigen::MatrixXd& input) {
  input_ = input;
  pre_act_.noalias() = input * store.value(w_).transpose();
  pre_act_.rowwise() += store.value(b_).transpose().row(0);
  output_ = pre_act_.cwiseMax(0.0);
  return output_;
}

Eigen::MatrixXd NodeMlpLayer::backward(ParamStore& store, const Eigen::MatrixXd& grad_out) {
  const Eigen::MatrixXd gz = (pre_act_.array() > 0.0).cast<double>() * grad_out.array();
  store.grad(b_).noalias() += gz.colwise().sum().transpose();
  store.grad(w_).noalias() += gz.transpose() * input_;
  return gz * store.value(w_);
}

PoolingModule::PoolingModule(ParamStore& store, const std::string& prefix, Pooling kind, int dim)
    : kind_(kind), dim_(dim) {
  if (kind_ == Pooling::kAttention) {
    gate_w_ = store.add(prefix + ".gate.W", dim_, 1);
    gate_b_ = store.add(prefix + ".gate.b", 1, 1);
  }
}

Eigen::VectorXd PoolingModule::forward(ParamStore& store, const Eigen::MatrixXd& embeddings,
                                       int exclude_row) {
  embeddings_ = embeddings;
  rows_.clear();
  for (int i = 0; i < embeddings.rows(); ++i) {
    if (i != exclude_row) rows_.push_back(i);
  }
  if (rows_.empty()) throw std::invalid_argument("pooling over an empty node set");

  pooled_ = Eigen::VectorXd::Zero(dim_);
  switch (kind_) {
    case Pooling::kSum:
    case Pooling::kMean: {
      for (int i : rows_) pooled_ += embeddings.row(i).transpose();
      if (kind_ == Pooling::kMean) pooled_ /= static_cast<double>(rows_.size());
      break;
    }
    case Pooling::kMax: {
      argmax_.assign(dim_, rows_[0]);
      pooled_ = embeddings.row(rows_[0]).transpose();
      for (size_t m = 1; m < rows_.size(); ++m) {
        const int i = rows_[m];
        for (int c = 0; c < dim_; ++c) {
          if (embeddings(i, c) > pooled_[c]) {
            pooled_[c] = embeddings(i, c);
            argmax_[c] = i;
          }
        }
      }
      break;
    }
    case Pooling::kAttention: {
      gates_ = Eigen::VectorXd::Zero(embeddings.rows());
      gate_denom_ = 1e-12;
      for (int i : rows_) {
        const double logit =
            embeddings.row(i).dot(store.value(gate_w_).col(0)) + store.value(gate_b_)(0, 0);
        gates_[i] = 1.0 / (1.0 + std::exp(-logit));
        gate_denom_ += gates_[i];
        pooled_ += gates_[i] * embeddings.row(i).transpose();
      }
      pooled_ /= gate_denom_;
      break;
    }
  }
  return pooled_;
}

Eigen::MatrixXd PoolingModule::backward(ParamStore& store, const Eigen::VectorXd& grad_pooled) {
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(embeddings_.rows(), dim_);
  switch (kind_) {
    case Pooling::kSum:
      for (int i : rows_) grad.row(i) = grad_pooled.transpose();
      break;
    case Pooling::kMean:
      for (int i : rows_) grad.row(i) = grad_pooled.transpose() / static_cast<double>(rows_.size());
      break;
    case Pooling::kMax:
      for (int c = 0; c < dim_; ++c) grad(argmax_[c], c) = grad_pooled[c];
      break;
    case Pooling::kAttention: {
      for (int i : rows_) {
        const double ggate =
            grad_pooled.dot(embeddings_.row(i).transpose() - pooled_) / gate_denom_;
        const double glogit = ggate * gates_[i] * (1.0 - gates_[i]);
        grad.row(i) = (gates_[i] / gate_denom_) * grad_pooled.transpose() +
                      glogit * store.value(gate_w_).col(0).transpose();
        store.grad(gate_w_).col(0) += glogit * embeddings_.row(i).transpose();
        store.grad(gate_b_)(0, 0) += glogit;
      }
      break;
    }
  }
  return grad;
}

LinearHead::LinearHead(ParamStore& store, const std::string& prefix, int in_dim, int out_dim) {
  w_ = store.add(prefix + ".W", out_dim, in_dim);
  b_ = store.add(prefix + ".b", out_dim, 1);
}

Eigen::VectorXd LinearHead::forward(ParamStore& store, const Eigen::VectorXd& input) {
  input_ = input;
  return store.value(w_) * input + store.value(b_).col(0);
}

Eigen::VectorXd LinearHead::backward(ParamStore& store, const Eigen::VectorXd& grad_out) {
  store.grad(w_).noalias() += grad_out * input_.transpose();
  store.grad(b_).col(0) += grad_out;
  return store.value(w_).transpose() * grad_out;
}

ConfidenceModule::ConfidenceModule(ParamStore& store, const std::string& prefix,
                                   ConfidenceHead kind, int in_dim, int out_dim)
    : kind_(kind) {
  if (kind_ == ConfidenceHead::kLinear) {
    w_.push_back(store.add(prefix + ".l0.W", out_dim, in_dim));
    b_.push_back(store.add(prefix + ".l0.b", out_dim, 1));
  } else {
    const int dims[4] = {in_dim, in_dim, in_dim, out_dim};
    for (int l = 0; l < 3; ++l) {
      const std::string lp = prefix + ".l" + std::to_string(l);
      w_.push_back(store.add(lp + ".W", dims[l + 1], dims[l]));
      b_.push_back(store.add(lp + ".b", dims[l + 1], 1));
    }
  }
}

Eigen::VectorXd ConfidenceModule::forward(ParamStore& store, const Eigen::VectorXd& input) {
  const size_t n_layers = w_.size();
  inputs_.assign(n_layers, Eigen::VectorXd());
  pre_acts_.assign(n_layers, Eigen::VectorXd());
  Eigen::VectorXd h = input;
  for (size_t l = 0; l < n_layers; ++l) {
    inputs_[l] = h;
    pre_acts_[l] = store.value(w_[l]) * h + store.value(b_[l]).col(0);
    h = l + 1 < n_layers ? pre_acts_[l].cwiseMax(0.0) : pre_acts_[l];
  }
  return h;  // logits; sigmoid applied by the caller
}

Eigen::VectorXd ConfidenceModule::backward(ParamStore& store, const Eigen::VectorXd& grad_logits) {
  Eigen::VectorXd g = grad_logits;
  for (size_t l = w_.size(); l-- > 0;) {
    if (l + 1 < w_.size()) {
      g = (pre_acts_[l].array() > 0.0).cast<double>() * g.array();
    }
    store.grad(w_[l]).noalias() += g * inputs_[l].transpose();
    store.grad(b_[l]).col(0) += g;
    g = store.value(w_[l]).transpose() * g;
  }
  return g;
}

Eigen::VectorXd DropoutModule::forward(const Eigen::VectorXd& input, bool training, Rng* rng) {
  if (!training || p_ <= 0.0 || rng == nullptr) {
    mask_ = Eigen::VectorXd::Ones(input.size());
    return input;
  }
  mask_.resize(input.size());
  const double keep = 1.0 - p_;
  for (int i = 0; i < input.size(); ++i) {
    mask_[i] = rng->bernoulli(p_) ? 0.0 : 1.0 / keep;
  }
  return input.cwiseProduct(mask_);
}

Eigen::VectorXd DropoutModule::backward(const Eigen::VectorXd& grad_out) const {
  return grad_out.cwiseProduct(mask_);
}

}  // namespace jamloc::gnn
