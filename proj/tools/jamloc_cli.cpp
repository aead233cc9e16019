#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "jamloc/eval.hpp"

using namespace jamloc;
using nlohmann::json;

namespace {

struct RunSettings {
  gnn::ModelConfig model;
  gnn::TrainConfig train;
  graph::GraphConfig graph;
  eval::DynamicEvalOptions dynamic_eval;
};

// A flat key-value config file; every key optional. CLI flags win over file
// values where both exist.
void apply_config_file(const std::string& path, RunSettings& s) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json doc = json::parse(in);

  if (doc.contains("arch")) {
    s.model = gnn::ModelConfig::defaults_for(gnn::arch_from_string(doc["arch"]), s.model.input_dim);
    s.train = gnn::TrainConfig::defaults_for(s.model.arch);
  }
  auto get = [&](const char* key, auto& target) {
    if (doc.contains(key)) target = doc[key].get<std::decay_t<decltype(target)>>();
  };
  get("layers", s.model.layers);
  get("hidden_dim", s.model.hidden_dim);
  get("out_dim", s.model.out_dim);
  get("heads", s.model.heads);
  get("dropout", s.model.dropout);
  if (doc.contains("pooling")) s.model.pooling = gnn::pooling_from_string(doc["pooling"]);
  if (doc.contains("conf_head")) {
    s.model.conf_head = doc["conf_head"] == "linear" ? gnn::ConfidenceHead::kLinear
                                                     : gnn::ConfidenceHead::kMlp3;
  }
  if (doc.contains("conf_in")) {
    s.model.conf_in = doc["conf_in"] == "supernode" ? gnn::ConfidenceInput::kSupernode
                                                    : gnn::ConfidenceInput::kPooledWithSupernode;
  }
  if (doc.contains("reg_in")) {
    s.model.reg_in = doc["reg_in"] == "pooled_with_sn"
                         ? gnn::RegressorInput::kPooledWithSupernode
                         : gnn::RegressorInput::kPooledWithoutSupernode;
  }
  if (doc.contains("conf_out")) {
    s.model.conf_out = doc["conf_out"] == "single" ? gnn::ConfidenceOutput::kSingle
                                                   : gnn::ConfidenceOutput::kMultiple;
  }

  get("epochs", s.train.epochs);
  get("learning_rate", s.train.learning_rate);
  get("weight_decay", s.train.weight_decay);
  get("warmup_fraction", s.train.warmup_fraction);
  get("batch_size", s.train.batch_size);
  get("val_fraction", s.train.val_fraction);
  get("lambda", s.train.lambda);
  if (doc.contains("loss")) s.train.loss = gnn::loss_from_string(doc["loss"]);
  get("crop_trajectories", s.train.crop_trajectories);
  if (doc.contains("augmentations")) {
    s.train.augmentations.clear();
    for (const auto& a : doc["augmentations"]) {
      s.train.augmentations.push_back(
          {graph::augmentation_from_string(a.at("kind")), a.value("p", 0.2)});
    }
  }

  get("k", s.graph.k);
  get("knn_directed", s.graph.knn_directed);
  if (doc.contains("supernode_edges")) {
    const std::string v = doc["supernode_edges"];
    s.graph.supernode_edges = v == "undirected" ? graph::SupernodeEdges::kUndirected
                              : v == "none"     ? graph::SupernodeEdges::kNone
                                                : graph::SupernodeEdges::kDirected;
  }

  if (doc.contains("downsample_method")) {
    s.train.downsample.method =
        sampling::downsample_method_from_string(doc["downsample_method"]);
  }
  get("downsample_nodes", s.train.downsample.target_nodes);
  get("bin_size", s.train.downsample.bin_size_m);
  get("checkpoint_stride", s.dynamic_eval.checkpoint_stride);
}

bool is_dynamic(const std::vector<scenario::ScenarioInstance>& data) {
  return !data.empty() && data.front().topology == scenario::Topology::kTrajectory;
}

void finish_report(const eval::EvalReport& report, const std::string& out) {
  std::filesystem::create_directories(out);
  report.write_records_csv(out + "/records.csv");
  report.write_summary_csv(out + "/summary.csv");
  json manifest{{"estimator", report.estimator},
                {"mode", report.mode},
                {"dataset_hash", report.dataset_hash},
                {"model_hash", report.model_hash},
                {"checkpoint_stride", report.checkpoint_stride},
                {"records", report.records.size()}};
  std::ofstream(out + "/manifest.json") << manifest.dump(2) << "\n";
  std::cout << "wrote " << out << "/summary.csv\n";
  for (const auto& [name, agg] : report.splits) {
    if (name == "all") {
      std::cout << report.estimator << " overall: rmse " << agg.rmse << " m, mae " << agg.mae
                << " m over " << agg.count << " records\n";
    }
  }
  if (report.mode == "dynamic") {
    std::cout << "trajectory-mean rmse " << report.trajectory_mean_rmse << " m\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"jamloc: jamming source localization toolkit"};
  app.require_subcommand(1);

  RunSettings settings;
  settings.train.downsample.target_nodes = 1000;
  uint64_t seed = 0;
  std::string config_path, data_path, out_path, checkpoint_path;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "deterministic run seed");
    cmd->add_option("--config", config_path, "JSON key-value config file");
    cmd->add_option("--out", out_path, "output path")->required();
  };

  // generate
  auto* gen = app.add_subcommand("generate", "synthesize a scenario dataset");
  std::string mode = "static", topology = "random", placement = "any";
  int count = 100;
  gen->add_option("--mode", mode, "static|dynamic")->check(CLI::IsMember({"static", "dynamic"}));
  gen->add_option("--topology", topology, "circle|triangle|rectangle|random");
  gen->add_option("--placement", placement, "inside_R|outside_R|any");
  gen->add_option("--count", count, "instances to generate")->required();
  add_common(gen);

  // downsample
  auto* ds = app.add_subcommand("downsample", "reduce trajectory datasets before graphing");
  std::string ds_method = "binning";
  int ds_nodes = 1000;
  double bin_size = 1.0;
  ds->add_option("--data", data_path)->required();
  ds->add_option("--downsample", ds_method, "window|binning");
  ds->add_option("--nodes", ds_nodes, "target node count");
  ds->add_option("--bin-size", bin_size, "bin edge length (m)");
  add_common(ds);

  // train
  auto* tr = app.add_subcommand("train", "train a localization model");
  std::string arch = "cage";
  int epochs_override = -1;
  tr->add_option("--arch", arch, "mlp|gcn|gat|pna|cage");
  tr->add_option("--data", data_path)->required();
  tr->add_option("--epochs", epochs_override, "override the config epoch count");
  add_common(tr);

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "evaluate a trained checkpoint");
  int stride = 50;
  ev->add_option("--checkpoint", checkpoint_path)->required();
  ev->add_option("--data", data_path)->required();
  ev->add_option("--stride", stride, "trajectory checkpoint stride");
  add_common(ev);

  // baseline
  auto* bl = app.add_subcommand("baseline", "run a classical estimator");
  std::string estimator = "wcl";
  bl->add_option("--estimator", estimator, "wcl|mlat|mle|lsq|pl")->required();
  bl->add_option("--data", data_path)->required();
  bl->add_option("--stride", stride, "trajectory checkpoint stride");
  add_common(bl);

  // ablate
  auto* ab = app.add_subcommand("ablate", "run an ablation grid");
  std::string grid = "k";
  ab->add_option("--spec", grid, "k|pooling|augmentation|cage_components|downsampling|node_features")
      ->required();
  ab->add_option("--data", data_path)->required();
  add_common(ab);

  // confidence
  auto* cf = app.add_subcommand("confidence", "confidence-vs-distance profile of a fused model");
  cf->add_option("--checkpoint", checkpoint_path)->required();
  cf->add_option("--data", data_path)->required();
  cf->add_option("--stride", stride);
  add_common(cf);

  // plot
  auto* pl = app.add_subcommand("plot", "evaluate and render figure series");
  pl->add_option("--checkpoint", checkpoint_path, "trained model to plot");
  std::string plot_estimator;
  pl->add_option("--estimator", plot_estimator, "classical estimator to plot");
  pl->add_option("--data", data_path)->required();
  pl->add_option("--stride", stride);
  add_common(pl);

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) apply_config_file(config_path, settings);
    settings.train.seed = seed;
    settings.dynamic_eval.checkpoint_stride = stride;
    settings.dynamic_eval.downsample = settings.train.downsample;

    if (gen->parsed()) {
      std::vector<scenario::ScenarioInstance> data;
      if (mode == "static") {
        data = scenario::generate_static(scenario::topology_from_string(topology),
                                         scenario::placement_from_string(placement), count, seed);
      } else {
        data = scenario::generate_dynamic(count, seed);
      }
      scenario::write_dataset(data, out_path);
      std::cout << "wrote " << data.size() << " instances to " << out_path << "\n";
    } else if (ds->parsed()) {
      auto data = scenario::read_dataset(data_path);
      sampling::DownsampleConfig cfg{sampling::downsample_method_from_string(ds_method), ds_nodes,
                                     bin_size};
      for (auto& inst : data) inst.samples = sampling::downsample(inst.samples, cfg);
      scenario::write_dataset(data, out_path);
      std::cout << "downsampled " << data.size() << " instances to " << out_path << "\n";
    } else if (tr->parsed()) {
      const auto data = scenario::read_dataset(data_path);
      bool config_picked_arch = false;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        config_picked_arch = json::parse(in).contains("arch");
      }
      if (!config_picked_arch) {
        // rebase on the flag's architecture defaults, then re-apply overrides
        settings.model = gnn::ModelConfig::defaults_for(gnn::arch_from_string(arch), 0);
        settings.train = gnn::TrainConfig::defaults_for(settings.model.arch);
        if (!config_path.empty()) apply_config_file(config_path, settings);
        settings.train.seed = seed;
      }
      if (epochs_override > 0) settings.train.epochs = epochs_override;
      if (!is_dynamic(data)) {
        settings.graph.static_transform = graph::NormalizationTransform::for_static_area(
            scenario::AreaBounds::static_default());
        settings.train.crop_trajectories = false;
      }
      const gnn::TrainedModel tm =
          gnn::train(settings.model, settings.train, settings.graph, data);
      gnn::save_checkpoint(tm, out_path);
      std::cout << "trained " << to_string(tm.model_config.arch) << " for "
                << tm.train_config.epochs << " epochs; best val loss "
                << tm.history.best_val_loss << " at epoch " << tm.history.best_epoch
                << "; checkpoint " << out_path << "\n";
    } else if (ev->parsed() || cf->parsed() || pl->parsed()) {
      const auto data = scenario::read_dataset(data_path);
      std::unique_ptr<eval::Estimator> est;
      gnn::TrainedModel tm;
      if (!checkpoint_path.empty()) {
        tm = gnn::load_checkpoint(checkpoint_path);
        settings.dynamic_eval.downsample = tm.train_config.downsample;
        est = eval::make_estimator(tm);
      } else if (!plot_estimator.empty()) {
        est = eval::make_estimator(classical::estimator_from_string(plot_estimator));
      } else {
        throw std::runtime_error("need --checkpoint or --estimator");
      }

      if (cf->parsed()) {
        const auto profile = eval::confidence_profile(tm, data, settings.dynamic_eval);
        profile.write_csv(out_path);
        std::cout << "wrote " << out_path << "\n";
        for (int b = eval::kNumBuckets - 1; b >= 0; --b) {
          std::cout << "bucket " << eval::bucket_name(b) << ": mean alpha "
                    << profile.bucket_alpha_mean[b] << " over " << profile.bucket_count[b]
                    << " checkpoints\n";
        }
      } else {
        const eval::EvalReport report = is_dynamic(data)
                                            ? eval::evaluate_dynamic(*est, data,
                                                                     settings.dynamic_eval)
                                            : eval::evaluate_static(*est, data);
        if (pl->parsed()) {
          if (tm.model != nullptr && tm.model_config.arch == gnn::Arch::kCage &&
              is_dynamic(data)) {
            const auto profile = eval::confidence_profile(tm, data, settings.dynamic_eval);
            eval::emit_plots(report, out_path, &profile);
          } else {
            eval::emit_plots(report, out_path, nullptr);
          }
          std::cout << "wrote plots to " << out_path << "\n";
        } else {
          finish_report(report, out_path);
        }
      }
    } else if (bl->parsed()) {
      const auto data = scenario::read_dataset(data_path);
      auto est = eval::make_estimator(classical::estimator_from_string(estimator));
      const eval::EvalReport report =
          is_dynamic(data) ? eval::evaluate_dynamic(*est, data, settings.dynamic_eval)
                           : eval::evaluate_static(*est, data);
      finish_report(report, out_path);
    } else if (ab->parsed()) {
      const auto data = scenario::read_dataset(data_path);
      eval::AblationOptions opts;
      opts.base_model = settings.model;
      opts.base_train = settings.train;
      opts.base_graph = settings.graph;
      opts.dynamic_eval = settings.dynamic_eval;
      if (!is_dynamic(data)) {
        opts.base_graph.static_transform = graph::NormalizationTransform::for_static_area(
            scenario::AreaBounds::static_default());
        opts.base_train.crop_trajectories = false;
      }
      const eval::AblationTable table =
          eval::run_ablation(eval::ablation_from_string(grid), data, opts);
      table.write_csv(out_path);
      std::cout << "wrote " << out_path << "\n";
      for (const auto& cell : table.cells) {
        std::cout << cell.label << ": "
                  << (cell.failed ? "FAILED " + cell.error
                                  : "rmse " + std::to_string(cell.rmse) + " m")
                  << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
