#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jamloc/gnn/train.hpp"

using namespace jamloc;
using namespace jamloc::gnn;

namespace {

graph::MeasurementGraph tiny_graph(uint64_t seed, int nodes, bool supernode) {
  Rng rng(seed);
  scenario::ScenarioInstance inst;
  inst.topology = scenario::Topology::kRandom;
  inst.dimensions = 2;
  inst.jammer.position = {rng.uniform(0, 1500), rng.uniform(0, 1500)};
  for (int i = 0; i < nodes; ++i) {
    inst.samples.push_back(
        {{rng.uniform(0, 1500), rng.uniform(0, 1500), 0}, rng.uniform(-95, -50), i});
  }
  graph::GraphConfig gcfg;
  gcfg.k = 3;
  gcfg.static_transform =
      graph::NormalizationTransform::for_static_area(scenario::AreaBounds::static_default());
  graph::MeasurementGraph g = graph::build_graph(inst, gcfg);
  if (supernode) graph::attach_supernode(g, gcfg);
  return g;
}

double model_loss(Model& model, const MessageGraph& mg, const Eigen::MatrixXd& features,
                  const Vector5& wcl, const Vector5& target, LossKind kind, double lambda) {
  const ForwardOutput out = model.forward(mg, features, wcl);
  return loss_value(instance_loss(out, target), kind, lambda);
}

// Central finite differences against the analytic gradients, every parameter.
double max_relative_gradient_error(Model& model, const graph::MeasurementGraph& g, LossKind kind,
                                   double lambda) {
  const MessageGraph mg = MessageGraph::from(g);
  const Vector5 wcl = g.wcl_estimate.vec();
  const Vector5 target = g.target.vec();

  model.params().zero_grads();
  const ForwardOutput out = model.forward(mg, g.node_features, wcl);
  const LossGrads lg = loss_gradients(out, target, kind, lambda, /*batch_size=*/1);
  model.backward(mg, lg.d_x_gnn, lg.d_x_final, lg.d_alpha);

  std::vector<Eigen::MatrixXd> analytic;
  for (const auto& t : model.params().tensors()) analytic.push_back(t.grad);

  double worst = 0.0;
  const double h = 1e-5;  // large enough that roundoff stays below the gate on tiny gradients
  for (size_t ti = 0; ti < model.params().tensors().size(); ++ti) {
    auto& value = model.params().tensors()[ti].value;
    for (int r = 0; r < value.rows(); ++r) {
      for (int c = 0; c < value.cols(); ++c) {
        const double saved = value(r, c);
        value(r, c) = saved + h;
        const double up = model_loss(model, mg, g.node_features, wcl, target, kind, lambda);
        value(r, c) = saved - h;
        const double down = model_loss(model, mg, g.node_features, wcl, target, kind, lambda);
        value(r, c) = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double a = analytic[ti](r, c);
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        worst = std::max(worst, rel);
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("a single in-edge gets full attention regardless of its weight") {
  ModelConfig cfg;
  cfg.arch = Arch::kGat;
  cfg.input_dim = 4;
  cfg.layers = 1;
  cfg.hidden_dim = 4;
  cfg.out_dim = 4;
  cfg.heads = 1;
  Model model(cfg);
  Rng rng(3);
  model.init(rng);

  MessageGraph mg;
  mg.num_nodes = 2;
  mg.in_edges.resize(2);
  mg.in_edges[1].emplace_back(0, 0.37);  // weight != 1 must not matter
  Eigen::MatrixXd x(2, 4);
  x << 0.3, -0.2, 0.8, 0.1, -0.5, 0.4, 0.2, 0.9;
  model.forward(mg, x, Vector5::Zero());

  const auto layers = model.attention_layers();
  REQUIRE(layers.size() == 1);
  const auto& alpha = (*layers[0])[0];  // head 0
  REQUIRE(alpha[1].size() == 1);
  CHECK(alpha[1][0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("attention rows sum to one on randomized graphs") {
  for (uint64_t trial = 0; trial < 100; ++trial) {
    const auto g = tiny_graph(trial, 5 + static_cast<int>(trial % 10), trial % 2 == 0);
    ModelConfig cfg;
    cfg.arch = g.supernode_index >= 0 ? Arch::kCage : Arch::kGat;
    cfg.input_dim = static_cast<int>(g.node_features.cols());
    cfg.layers = 2;
    cfg.hidden_dim = 8;
    cfg.out_dim = 8;
    cfg.heads = 2;
    Model model(cfg);
    Rng rng(trial + 1000);
    model.init(rng);
    const MessageGraph mg = MessageGraph::from(g);
    model.forward(mg, g.node_features, g.wcl_estimate.vec());
    for (const auto* layer : model.attention_layers()) {
      for (const auto& head : *layer) {
        for (int i = 0; i < mg.num_nodes; ++i) {
          if (mg.in_edges[i].empty()) continue;
          double sum = 0.0;
          for (double a : head[i]) sum += a;
          CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        }
      }
    }
  }
}

TEST_CASE("equal weights and equal logits give uniform attention") {
  ModelConfig cfg;
  cfg.arch = Arch::kGat;
  cfg.input_dim = 3;
  cfg.layers = 1;
  cfg.hidden_dim = 4;
  cfg.out_dim = 4;
  cfg.heads = 1;
  Model model(cfg);
  Rng rng(5);
  model.init(rng);

  MessageGraph mg;
  mg.num_nodes = 4;
  mg.in_edges.resize(4);
  for (int j = 1; j < 4; ++j) mg.in_edges[0].emplace_back(j, 0.6);
  Eigen::MatrixXd x(4, 3);
  // identical neighbor features -> identical logits
  x << 0.1, 0.2, 0.3, 0.7, -0.4, 0.5, 0.7, -0.4, 0.5, 0.7, -0.4, 0.5;
  model.forward(mg, x, Vector5::Zero());
  const auto& alpha = (*model.attention_layers()[0])[0];
  for (double a : alpha[0]) CHECK(a == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("regression head is the bias when weights are zero") {
  const auto g = tiny_graph(11, 6, false);
  ModelConfig cfg;
  cfg.arch = Arch::kGat;
  cfg.input_dim = static_cast<int>(g.node_features.cols());
  cfg.layers = 1;
  cfg.hidden_dim = 4;
  cfg.out_dim = 4;
  cfg.heads = 1;
  Model model(cfg);
  Rng rng(6);
  model.init(rng);
  for (auto& t : model.params().tensors()) {
    if (t.name == "reg.W") t.value.setZero();
    if (t.name == "reg.b") t.value.setConstant(0.25);
  }
  const ForwardOutput out =
      model.forward(MessageGraph::from(g), g.node_features, g.wcl_estimate.vec());
  for (int i = 0; i < 5; ++i) CHECK(out.x_gnn[i] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("relabeling measurement nodes leaves the outputs unchanged") {
  const auto g = tiny_graph(21, 9, true);
  ModelConfig cfg = ModelConfig::defaults_for(Arch::kCage, static_cast<int>(g.node_features.cols()));
  cfg.layers = 2;
  cfg.hidden_dim = 8;
  cfg.out_dim = 8;
  cfg.heads = 2;
  Model model(cfg);
  Rng rng(7);
  model.init(rng);

  const ForwardOutput base =
      model.forward(MessageGraph::from(g), g.node_features, g.wcl_estimate.vec());

  // permute measurement nodes (supernode stays last)
  const int n = g.num_measurement_nodes();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = (i * 5 + 3) % n;
  graph::MeasurementGraph p = g;
  for (int i = 0; i < n; ++i) {
    p.node_features.row(perm[i]) = g.node_features.row(i);
  }
  p.edges.clear();
  p.edge_weights.clear();
  auto map_node = [&](int v) { return v == g.supernode_index ? v : perm[v]; };
  for (size_t e = 0; e < g.edges.size(); ++e) {
    p.edges.emplace_back(map_node(g.edges[e].first), map_node(g.edges[e].second));
    p.edge_weights.push_back(g.edge_weights[e]);
  }
  const ForwardOutput permuted =
      model.forward(MessageGraph::from(p), p.node_features, p.wcl_estimate.vec());

  CHECK((base.x_gnn - permuted.x_gnn).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((base.alpha - permuted.alpha).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((base.x_final - permuted.x_final).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("confidence head saturates to exact blend endpoints") {
  const auto g = tiny_graph(31, 7, true);
  ModelConfig cfg;
  cfg.arch = Arch::kCage;
  cfg.input_dim = static_cast<int>(g.node_features.cols());
  cfg.layers = 2;
  cfg.hidden_dim = 8;
  cfg.out_dim = 8;
  cfg.heads = 2;
  Model model(cfg);
  Rng rng(8);
  model.init(rng);
  const MessageGraph mg = MessageGraph::from(g);

  auto force_bias = [&](double bias) {
    for (auto& t : model.params().tensors()) {
      if (t.name == "conf.l2.W") t.value.setZero();
      if (t.name == "conf.l2.b") t.value.setConstant(bias);
    }
  };
  force_bias(800.0);  // sigmoid saturates to exactly 1
  ForwardOutput out = model.forward(mg, g.node_features, g.wcl_estimate.vec());
  CHECK(out.x_final == out.x_gnn);
  force_bias(-800.0);  // exactly 0
  out = model.forward(mg, g.node_features, g.wcl_estimate.vec());
  CHECK(out.x_final == g.wcl_estimate.vec());

  force_bias(0.0);
  out = model.forward(mg, g.node_features, g.wcl_estimate.vec());
  for (int i = 0; i < 5; ++i) {
    CHECK(out.alpha[i] == doctest::Approx(0.5).epsilon(1e-12));
    const double lo = std::min(out.x_gnn[i], g.wcl_estimate.vec()[i]);
    const double hi = std::max(out.x_gnn[i], g.wcl_estimate.vec()[i]);
    CHECK(out.x_final[i] >= lo - 1e-12);
    CHECK(out.x_final[i] <= hi + 1e-12);
  }
}

TEST_CASE("single-output confidence broadcasts and stays strictly inside (0,1)") {
  const auto g = tiny_graph(41, 6, true);
  ModelConfig cfg;
  cfg.arch = Arch::kCage;
  cfg.input_dim = static_cast<int>(g.node_features.cols());
  cfg.layers = 1;
  cfg.hidden_dim = 8;
  cfg.out_dim = 8;
  cfg.heads = 2;
  cfg.conf_out = ConfidenceOutput::kSingle;
  Model model(cfg);
  Rng rng(9);
  model.init(rng);
  const ForwardOutput out =
      model.forward(MessageGraph::from(g), g.node_features, g.wcl_estimate.vec());
  for (int i = 0; i < 5; ++i) {
    CHECK(out.alpha[i] == out.alpha[0]);
    CHECK(out.alpha[i] > 0.0);
    CHECK(out.alpha[i] < 1.0);
  }
}

TEST_CASE("loss values match a scalar hand computation") {
  ForwardOutput a;
  a.x_gnn << 1, 0, 0, 0, 0;
  a.x_final = a.x_gnn;
  a.alpha = Vector5::Ones();
  Vector5 target;
  target << 1, 0, 0, 0, 0;
  const LossTerms ta = instance_loss(a, target);
  CHECK(loss_value(ta, LossKind::kCage, 0.0) == doctest::Approx(0.0));

  // hand batch of two
  ForwardOutput b;
  b.x_gnn << 0.5, 0, 0, 0, 0;
  b.alpha = Vector5::Constant(0.5);
  b.x_final << 0.75, 0, 0, 0, 0;
  Vector5 tb;
  tb << 1, 0, 0, 0, 0;
  const LossTerms t2 = instance_loss(b, tb);
  CHECK(t2.gnn == doctest::Approx(0.25));
  CHECK(t2.adapt == doctest::Approx(0.0625));
  CHECK(t2.penalty == doctest::Approx(5 * 0.25));
  const double batch_cage = 0.5 * (loss_value(ta, LossKind::kCage, 0.0) +
                                   loss_value(t2, LossKind::kCage, 0.0));
  CHECK(batch_cage == doctest::Approx(0.5 * (0.0 + 0.5 * (0.25 + 0.0625))));
  // lambdaed penalty is additive and vanishes at lambda 0
  CHECK(loss_value(t2, LossKind::kCage, 0.1) ==
        doctest::Approx(0.5 * (0.25 + 0.0625) + 0.1 * 1.25));
}

TEST_CASE("analytic gradients match finite differences for the fused model") {
  const auto g = tiny_graph(51, 5, true);
  ModelConfig cfg;
  cfg.arch = Arch::kCage;
  cfg.input_dim = static_cast<int>(g.node_features.cols());
  cfg.layers = 2;
  cfg.hidden_dim = 8;
  cfg.out_dim = 8;
  cfg.heads = 2;
  Model model(cfg);
  Rng rng(10);
  model.init(rng);
  CHECK(max_relative_gradient_error(model, g, LossKind::kCage, 0.0) < 1e-4);
  CHECK(max_relative_gradient_error(model, g, LossKind::kCage, 0.1) < 1e-4);
}

TEST_CASE("gradients also check out for the other architectures and poolings") {
  const auto g = tiny_graph(61, 6, false);
  struct Case {
    Arch arch;
    Pooling pooling;
  };
  const Case cases[] = {{Arch::kGat, Pooling::kMax},
                        {Arch::kGcn, Pooling::kMean},
                        {Arch::kPna, Pooling::kSum},
                        {Arch::kMlp, Pooling::kAttention}};
  for (const auto& c : cases) {
    ModelConfig cfg;
    cfg.arch = c.arch;
    cfg.input_dim = static_cast<int>(g.node_features.cols());
    cfg.layers = 2;
    cfg.hidden_dim = 8;
    cfg.out_dim = 8;
    cfg.heads = 2;
    cfg.pooling = c.pooling;
    Model model(cfg);
    Rng rng(12);
    model.init(rng);
    INFO("arch ", to_string(c.arch));
    CHECK(max_relative_gradient_error(model, g, LossKind::kGnn, 0.0) < 1e-4);
  }
}

TEST_CASE("gradients cover the pooled confidence input and single output variants") {
  const auto g = tiny_graph(71, 6, true);
  ModelConfig cfg;
  cfg.arch = Arch::kCage;
  cfg.input_dim = static_cast<int>(g.node_features.cols());
  cfg.layers = 2;
  cfg.hidden_dim = 8;
  cfg.out_dim = 8;
  cfg.heads = 2;
  cfg.conf_in = ConfidenceInput::kPooledWithSupernode;
  cfg.reg_in = RegressorInput::kPooledWithSupernode;
  cfg.conf_out = ConfidenceOutput::kSingle;
  cfg.conf_head = ConfidenceHead::kLinear;
  Model model(cfg);
  Rng rng(13);
  model.init(rng);
  CHECK(max_relative_gradient_error(model, g, LossKind::kAdapt, 0.05) < 1e-4);
}

TEST_CASE("learning rate schedule: warmup peak and cosine tail") {
  const long total = 1000;
  const double peak = 7e-4;
  CHECK(scheduled_lr(0, total, peak, 0.2) == doctest::Approx(0.0));
  CHECK(scheduled_lr(200, total, peak, 0.2) == doctest::Approx(peak));
  CHECK(scheduled_lr(100, total, peak, 0.2) == doctest::Approx(0.5 * peak));
  CHECK(scheduled_lr(600, total, peak, 0.2) == doctest::Approx(0.5 * peak).epsilon(1e-9));
  CHECK(scheduled_lr(999, total, peak, 0.2) < 0.01 * peak);
}

TEST_CASE("short training run reduces the loss and is seed deterministic") {
  const auto data =
      scenario::generate_static(scenario::Topology::kRandom, scenario::Placement::kNotApplicable,
                                200, 71);
  graph::GraphConfig gcfg;
  gcfg.k = 3;
  gcfg.static_transform =
      graph::NormalizationTransform::for_static_area(scenario::AreaBounds::static_default());
  ModelConfig mcfg;
  mcfg.arch = Arch::kGat;
  mcfg.layers = 2;
  mcfg.hidden_dim = 16;
  mcfg.out_dim = 16;
  mcfg.heads = 2;
  mcfg.dropout = 0.0;
  TrainConfig tcfg = TrainConfig::defaults_for(Arch::kGat);
  tcfg.epochs = 20;
  tcfg.batch_size = 16;
  tcfg.seed = 5;

  const TrainedModel run1 = train(mcfg, tcfg, gcfg, data);
  CHECK(run1.history.train_loss.back() < run1.history.train_loss.front());
  CHECK(run1.history.best_epoch >= 0);

  const TrainedModel run2 = train(mcfg, tcfg, gcfg, data);
  CHECK(run1.history.train_loss[0] == run2.history.train_loss[0]);
  CHECK(run1.history.val_loss == run2.history.val_loss);
}

TEST_CASE("checkpoints round trip through disk") {
  const auto data =
      scenario::generate_static(scenario::Topology::kRandom, scenario::Placement::kNotApplicable,
                                40, 81);
  graph::GraphConfig gcfg;
  gcfg.static_transform =
      graph::NormalizationTransform::for_static_area(scenario::AreaBounds::static_default());
  ModelConfig mcfg;
  mcfg.arch = Arch::kCage;
  mcfg.layers = 2;
  mcfg.hidden_dim = 8;
  mcfg.out_dim = 8;
  mcfg.heads = 2;
  mcfg.dropout = 0.0;
  TrainConfig tcfg = TrainConfig::defaults_for(Arch::kCage);
  tcfg.epochs = 2;
  tcfg.seed = 3;

  const TrainedModel tm = train(mcfg, tcfg, gcfg, data);
  const std::string path = "/tmp/jamloc_test_ckpt.json";
  save_checkpoint(tm, path);
  const TrainedModel back = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(back.dataset_hash == tm.dataset_hash);
  CHECK(back.history.best_epoch == tm.history.best_epoch);
  for (size_t i = 0; i < tm.model->params().tensors().size(); ++i) {
    CHECK(back.model->params().tensors()[i].value == tm.model->params().tensors()[i].value);
  }
  // identical outputs on a fresh graph
  const auto g = tiny_graph(91, 8, true);
  const ForwardOutput a =
      tm.model->forward(MessageGraph::from(g), g.node_features, g.wcl_estimate.vec());
  const ForwardOutput b =
      back.model->forward(MessageGraph::from(g), g.node_features, g.wcl_estimate.vec());
  CHECK(a.x_final == b.x_final);
}

TEST_CASE("training aborts with a diagnostic on non-finite loss") {
  auto data = scenario::generate_static(scenario::Topology::kRandom,
                                        scenario::Placement::kNotApplicable, 10, 91);
  graph::GraphConfig gcfg;
  gcfg.static_transform =
      graph::NormalizationTransform::for_static_area(scenario::AreaBounds::static_default());
  ModelConfig mcfg;
  mcfg.arch = Arch::kGat;
  mcfg.layers = 1;
  mcfg.hidden_dim = 8;
  mcfg.out_dim = 8;
  mcfg.heads = 2;
  TrainConfig tcfg;
  tcfg.epochs = 1;
  tcfg.learning_rate = 1e308;  // drive the parameters to overflow
  tcfg.warmup_fraction = 1e-9;
  tcfg.batch_size = 2;
  CHECK_THROWS_AS(train(mcfg, tcfg, gcfg, data), TrainingError);
}
