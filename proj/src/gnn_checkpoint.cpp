#include <fstream>

#include <json.hpp>

#include "jamloc/gnn/train.hpp"

namespace jamloc::gnn {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
Vec3 vec3_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

json model_config_to_json(const ModelConfig& m) {
  return {
      {"arch", to_string(m.arch)},
      {"input_dim", m.input_dim},
      {"layers", m.layers},
      {"hidden_dim", m.hidden_dim},
      {"out_dim", m.out_dim},
      {"heads", m.heads},
      {"dropout", m.dropout},
      {"pooling", to_string(m.pooling)},
      {"leaky_slope", m.leaky_slope},
      {"conf_head", m.conf_head == ConfidenceHead::kLinear ? "linear" : "mlp3"},
      {"conf_in", m.conf_in == ConfidenceInput::kSupernode ? "supernode" : "pooled_with_sn"},
      {"reg_in",
       m.reg_in == RegressorInput::kPooledWithoutSupernode ? "pooled_without_sn" : "pooled_with_sn"},
      {"conf_out", m.conf_out == ConfidenceOutput::kSingle ? "single" : "multiple"},
  };
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig m;
  m.arch = arch_from_string(j.at("arch").get<std::string>());
  m.input_dim = j.at("input_dim").get<int>();
  m.layers = j.at("layers").get<int>();
  m.hidden_dim = j.at("hidden_dim").get<int>();
  m.out_dim = j.at("out_dim").get<int>();
  m.heads = j.at("heads").get<int>();
  m.dropout = j.at("dropout").get<double>();
  m.pooling = pooling_from_string(j.at("pooling").get<std::string>());
  m.leaky_slope = j.at("leaky_slope").get<double>();
  m.conf_head =
      j.at("conf_head") == "linear" ? ConfidenceHead::kLinear : ConfidenceHead::kMlp3;
  m.conf_in = j.at("conf_in") == "supernode" ? ConfidenceInput::kSupernode
                                             : ConfidenceInput::kPooledWithSupernode;
  m.reg_in = j.at("reg_in") == "pooled_without_sn" ? RegressorInput::kPooledWithoutSupernode
                                                   : RegressorInput::kPooledWithSupernode;
  m.conf_out =
      j.at("conf_out") == "single" ? ConfidenceOutput::kSingle : ConfidenceOutput::kMultiple;
  return m;
}

json graph_config_to_json(const graph::GraphConfig& g) {
  json mask{
      {"cartesian", g.features.cartesian},
      {"neighbor_median", g.features.neighbor_median},
      {"neighbor_max", g.features.neighbor_max},
      {"noise_deviation", g.features.noise_deviation},
      {"weighted_centroid", g.features.weighted_centroid},
      {"centroid_distance", g.features.centroid_distance},
      {"direction", g.features.direction},
      {"temporal_delta", g.features.temporal_delta},
      {"azimuth_to_centroid", g.features.azimuth_to_centroid},
      {"azimuth_to_wc", g.features.azimuth_to_wc},
      {"moving_average", g.features.moving_average},
      {"path_distance", g.features.path_distance},
      {"random_feature", g.features.random_feature},
  };
  json out{
      {"k", g.k},
      {"knn_directed", g.knn_directed},
      {"use_supernode", g.use_supernode},
      {"supernode_edges", g.supernode_edges == graph::SupernodeEdges::kDirected     ? "directed"
                          : g.supernode_edges == graph::SupernodeEdges::kUndirected ? "undirected"
                                                                                    : "none"},
      {"features", std::move(mask)},
  };
  if (g.static_transform) {
    const auto& t = *g.static_transform;
    out["static_transform"] = {
        {"offset", vec3_to_json(t.position_offset)}, {"scale", vec3_to_json(t.position_scale)},
        {"noise_min", t.noise_min_dbm},              {"noise_max", t.noise_max_dbm},
        {"r_scale", t.r_scale_m},
    };
  }
  return out;
}

graph::GraphConfig graph_config_from_json(const json& j) {
  graph::GraphConfig g;
  g.k = j.at("k").get<int>();
  g.knn_directed = j.at("knn_directed").get<bool>();
  g.use_supernode = j.at("use_supernode").get<bool>();
  const std::string sn = j.at("supernode_edges").get<std::string>();
  g.supernode_edges = sn == "directed"     ? graph::SupernodeEdges::kDirected
                      : sn == "undirected" ? graph::SupernodeEdges::kUndirected
                                           : graph::SupernodeEdges::kNone;
  const json& mask = j.at("features");
  g.features.cartesian = mask.at("cartesian").get<bool>();
  g.features.neighbor_median = mask.at("neighbor_median").get<bool>();
  g.features.neighbor_max = mask.at("neighbor_max").get<bool>();
  g.features.noise_deviation = mask.at("noise_deviation").get<bool>();
  g.features.weighted_centroid = mask.at("weighted_centroid").get<bool>();
  g.features.centroid_distance = mask.at("centroid_distance").get<bool>();
  g.features.direction = mask.at("direction").get<bool>();
  g.features.temporal_delta = mask.at("temporal_delta").get<bool>();
  g.features.azimuth_to_centroid = mask.at("azimuth_to_centroid").get<bool>();
  g.features.azimuth_to_wc = mask.at("azimuth_to_wc").get<bool>();
  g.features.moving_average = mask.at("moving_average").get<bool>();
  g.features.path_distance = mask.at("path_distance").get<bool>();
  g.features.random_feature = mask.at("random_feature").get<bool>();
  if (j.contains("static_transform")) {
    const json& t = j.at("static_transform");
    graph::NormalizationTransform nt;
    nt.position_offset = vec3_from_json(t.at("offset"));
    nt.position_scale = vec3_from_json(t.at("scale"));
    nt.noise_min_dbm = t.at("noise_min").get<double>();
    nt.noise_max_dbm = t.at("noise_max").get<double>();
    nt.r_scale_m = t.at("r_scale").get<double>();
    g.static_transform = nt;
  }
  return g;
}

json train_config_to_json(const TrainConfig& t) {
  return {
      {"epochs", t.epochs},
      {"learning_rate", t.learning_rate},
      {"weight_decay", t.weight_decay},
      {"warmup_fraction", t.warmup_fraction},
      {"batch_size", t.batch_size},
      {"seed", t.seed},
      {"val_fraction", t.val_fraction},
      {"loss", to_string(t.loss)},
      {"lambda", t.lambda},
      {"augmentations",
       [&] {
         json a = json::array();
         for (const auto& aug : t.augmentations) {
           a.push_back({{"kind", graph::to_string(aug.kind)}, {"p", aug.p}});
         }
         return a;
       }()},
      {"crop_trajectories", t.crop_trajectories},
      {"downsample",
       {{"method", sampling::to_string(t.downsample.method)},
        {"target_nodes", t.downsample.target_nodes},
        {"bin_size_m", t.downsample.bin_size_m}}},
  };
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig t;
  t.epochs = j.at("epochs").get<int>();
  t.learning_rate = j.at("learning_rate").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.warmup_fraction = j.at("warmup_fraction").get<double>();
  t.batch_size = j.at("batch_size").get<int>();
  t.seed = j.at("seed").get<uint64_t>();
  t.val_fraction = j.at("val_fraction").get<double>();
  t.loss = loss_from_string(j.at("loss").get<std::string>());
  t.lambda = j.at("lambda").get<double>();
  t.augmentations.clear();
  for (const json& a : j.at("augmentations")) {
    t.augmentations.push_back(
        {graph::augmentation_from_string(a.at("kind").get<std::string>()), a.at("p").get<double>()});
  }
  t.crop_trajectories = j.at("crop_trajectories").get<bool>();
  const json& ds = j.at("downsample");
  t.downsample.method = sampling::downsample_method_from_string(ds.at("method").get<std::string>());
  t.downsample.target_nodes = ds.at("target_nodes").get<int>();
  t.downsample.bin_size_m = ds.at("bin_size_m").get<double>();
  return t;
}

}  // namespace

void save_checkpoint(const TrainedModel& tm, const std::string& path) {
  json params = json::array();
  for (const auto& t : tm.model->params().tensors()) {
    std::vector<double> data(t.value.size());
    Eigen::Map<Eigen::MatrixXd>(data.data(), t.value.rows(), t.value.cols()) = t.value;
    params.push_back({{"name", t.name},
                      {"rows", t.value.rows()},
                      {"cols", t.value.cols()},
                      {"data", std::move(data)}});
  }
  json doc{
      {"format", "jamloc-checkpoint"},
      {"version", kCheckpointVersion},
      {"model", model_config_to_json(tm.model_config)},
      {"graph", graph_config_to_json(tm.graph_config)},
      {"train", train_config_to_json(tm.train_config)},
      {"manifest",
       {{"dataset_hash", tm.dataset_hash},
        {"prng", Rng::kPrngName},
        {"best_epoch", tm.history.best_epoch},
        {"best_val_loss", tm.history.best_val_loss},
        {"train_loss", tm.history.train_loss},
        {"val_loss", tm.history.val_loss}}},
      {"params", std::move(params)},
  };
  std::ofstream out(path);
  if (!out) throw DatasetFormatError("cannot open for writing: " + path);
  out << doc.dump() << '\n';
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetFormatError("cannot open for reading: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw DatasetFormatError("malformed checkpoint " + path + ": " + e.what());
  }
  if (doc.value("format", "") != "jamloc-checkpoint") {
    throw DatasetFormatError("not a jamloc checkpoint: " + path);
  }
  if (doc.value("version", -1) != kCheckpointVersion) {
    throw DatasetFormatError("checkpoint version mismatch in " + path);
  }

  TrainedModel tm;
  tm.model_config = model_config_from_json(doc.at("model"));
  tm.graph_config = graph_config_from_json(doc.at("graph"));
  tm.train_config = train_config_from_json(doc.at("train"));
  const json& manifest = doc.at("manifest");
  tm.dataset_hash = manifest.at("dataset_hash").get<uint64_t>();
  tm.history.best_epoch = manifest.at("best_epoch").get<int>();
  tm.history.best_val_loss = manifest.at("best_val_loss").get<double>();
  tm.history.train_loss = manifest.at("train_loss").get<std::vector<double>>();
  tm.history.val_loss = manifest.at("val_loss").get<std::vector<double>>();

  tm.model = std::make_shared<Model>(tm.model_config);
  auto& tensors = tm.model->params().tensors();
  const json& params = doc.at("params");
  if (params.size() != tensors.size()) {
    throw DatasetFormatError("checkpoint parameter count mismatch in " + path);
  }
  for (size_t i = 0; i < tensors.size(); ++i) {
    const json& p = params.at(i);
    if (p.at("name") != tensors[i].name || p.at("rows") != tensors[i].value.rows() ||
        p.at("cols") != tensors[i].value.cols()) {
      throw DatasetFormatError("checkpoint tensor layout mismatch at " +
                               p.at("name").get<std::string>());
    }
    const auto data = p.at("data").get<std::vector<double>>();
    tensors[i].value =
        Eigen::Map<const Eigen::MatrixXd>(data.data(), tensors[i].value.rows(),
                                          tensors[i].value.cols());
  }
  return tm;
}

}  // namespace jamloc::gnn
