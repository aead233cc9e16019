#include "jamloc/gnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jamloc::gnn {

graph::MeasurementGraph prepare_graph(const std::vector<scenario::MeasurementSample>& samples,
                                      const scenario::ScenarioInstance& inst,
                                      const graph::GraphConfig& gcfg,
                                      const sampling::DownsampleConfig* downsample_cfg) {
  const bool dynamic = inst.topology == scenario::Topology::kTrajectory;
  graph::MeasurementGraph g =
      dynamic && downsample_cfg
          ? graph::build_graph(sampling::downsample(samples, *downsample_cfg), inst, gcfg)
          : graph::build_graph(samples, inst, gcfg);
  if (gcfg.use_supernode) graph::attach_supernode(g, gcfg);
  return g;
}

graph::MeasurementGraph prepare_graph(const scenario::ScenarioInstance& inst,
                                      const graph::GraphConfig& gcfg,
                                      const sampling::DownsampleConfig* downsample_cfg) {
  return prepare_graph(inst.samples, inst, gcfg, downsample_cfg);
}

int input_dim_for(const graph::GraphConfig& gcfg, bool dynamic_data) {
  return gcfg.features.feature_count(dynamic_data);
}

namespace {

struct EvalGraph {
  MessageGraph topology;
  Eigen::MatrixXd features;
  Vector5 wcl;
  Vector5 target;
};

EvalGraph to_eval_graph(const graph::MeasurementGraph& g) {
  return {MessageGraph::from(g), g.node_features, g.wcl_estimate.vec(), g.target.vec()};
}

double mean_eval_loss(Model& model, const std::vector<EvalGraph>& graphs, LossKind kind,
                      double lambda) {
  if (graphs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& eg : graphs) {
    const ForwardOutput out = model.forward(eg.topology, eg.features, eg.wcl);
    acc += loss_value(instance_loss(out, eg.target), kind, lambda);
  }
  return acc / static_cast<double>(graphs.size());
}

}  // namespace

TrainedModel train(ModelConfig mcfg, TrainConfig tcfg, graph::GraphConfig gcfg,
                   const std::vector<scenario::ScenarioInstance>& data) {
  if (data.empty()) throw TrainingError("train: empty dataset");
  const bool dynamic = data.front().topology == scenario::Topology::kTrajectory;
  gcfg.use_supernode = mcfg.arch == Arch::kCage;
  mcfg.input_dim = input_dim_for(gcfg, dynamic);

  Rng rng(splitmix64(tcfg.seed));
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const int val_count =
      std::min<int>(static_cast<int>(data.size()) - 1,
                    std::max(1, static_cast<int>(std::lround(tcfg.val_fraction * data.size()))));
  std::vector<int> val_idx(order.begin(), order.begin() + val_count);
  std::vector<int> train_idx(order.begin() + val_count, order.end());

  auto model = std::make_shared<Model>(mcfg);
  model->init(rng);

  // Static graphs are reusable across epochs; augmentation works on a copy.
  // Trajectories are recropped and rebuilt every epoch.
  std::vector<graph::MeasurementGraph> static_base;
  if (!dynamic) {
    static_base.reserve(data.size());
    graph::GraphConfig base_cfg = gcfg;
    base_cfg.use_supernode = false;
    for (const auto& inst : data) static_base.push_back(graph::build_graph(inst, base_cfg));
  }

  std::vector<EvalGraph> val_graphs;
  val_graphs.reserve(val_idx.size());
  for (int i : val_idx) {
    val_graphs.push_back(to_eval_graph(prepare_graph(data[i], gcfg, &tcfg.downsample)));
  }

  const long steps_per_epoch =
      (static_cast<long>(train_idx.size()) + tcfg.batch_size - 1) / tcfg.batch_size;
  const long total_steps = steps_per_epoch * tcfg.epochs;
  AdamW optimizer(model->params(), tcfg.weight_decay);

  TrainedModel result;
  result.dataset_hash = scenario::dataset_fingerprint(data);
  ParamStore best_params = model->params();

  long step = 0;
  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    std::vector<int> epoch_order = train_idx;
    rng.shuffle(epoch_order);

    double epoch_loss = 0.0;
    long cursor = 0;
    while (cursor < static_cast<long>(epoch_order.size())) {
      const long batch_end =
          std::min<long>(cursor + tcfg.batch_size, static_cast<long>(epoch_order.size()));
      const int batch_size = static_cast<int>(batch_end - cursor);
      model->params().zero_grads();
      double batch_loss = 0.0;

      for (long b = cursor; b < batch_end; ++b) {
        const int idx = epoch_order[b];
        Rng inst_rng = Rng::for_stream(splitmix64(tcfg.seed ^ (0x9e3779b9ull * (epoch + 1))),
                                       static_cast<uint64_t>(idx));
        graph::MeasurementGraph g;
        if (dynamic) {
          scenario::ScenarioInstance inst = tcfg.crop_trajectories
                                                ? graph::trajectory_crop(data[idx], inst_rng)
                                                : data[idx];
          graph::GraphConfig base_cfg = gcfg;
          base_cfg.use_supernode = false;
          g = graph::build_graph(sampling::downsample(inst.samples, tcfg.downsample), inst,
                                 base_cfg);
        } else {
          g = static_base[idx];
        }
        for (const auto& aug : tcfg.augmentations) {
          graph::augment(g, aug.kind, aug.p, inst_rng, gcfg);
        }
        if (gcfg.use_supernode) graph::attach_supernode(g, gcfg);

        const MessageGraph mg = MessageGraph::from(g);
        const Vector5 target = g.target.vec();
        const ForwardOutput out =
            model->forward(mg, g.node_features, g.wcl_estimate.vec(), /*training=*/true,
                           &inst_rng);
        const LossTerms terms = instance_loss(out, target);
        batch_loss += loss_value(terms, tcfg.loss, tcfg.lambda);
        const LossGrads grads = loss_gradients(out, target, tcfg.loss, tcfg.lambda, batch_size);
        model->backward(mg, grads.d_x_gnn, grads.d_x_final, grads.d_alpha);
      }

      batch_loss /= batch_size;
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(step) + "; first batch instance index " +
                            std::to_string(epoch_order[cursor]));
      }
      epoch_loss += batch_loss * batch_size;

      optimizer.step(model->params(), scheduled_lr(step, total_steps, tcfg.learning_rate,
                                                   tcfg.warmup_fraction));
      ++step;
      cursor = batch_end;
    }

    result.history.train_loss.push_back(epoch_loss / static_cast<double>(epoch_order.size()));
    const double val_loss = mean_eval_loss(*model, val_graphs, tcfg.loss, tcfg.lambda);
    result.history.val_loss.push_back(val_loss);
    if (val_loss < result.history.best_val_loss) {
      result.history.best_val_loss = val_loss;
      result.history.best_epoch = epoch;
      best_params.copy_values_from(model->params());
    }
  }

  model->params().copy_values_from(best_params);
  result.model_config = mcfg;
  result.graph_config = gcfg;
  result.train_config = tcfg;
  result.model = model;
  return result;
}

}  // namespace jamloc::gnn
