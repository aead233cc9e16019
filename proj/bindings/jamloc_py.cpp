#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jamloc/eval.hpp"

namespace py = pybind11;
using namespace jamloc;

namespace {

std::vector<std::array<double, 3>> positions_of(const scenario::ScenarioInstance& inst) {
  std::vector<std::array<double, 3>> out;
  out.reserve(inst.samples.size());
  for (const auto& s : inst.samples) out.push_back({s.position.x, s.position.y, s.position.z});
  return out;
}

Vec3 to_vec3(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

}  // namespace

PYBIND11_MODULE(_jamloc, m) {
  m.doc() = "Jamming source localization toolkit: scenario synthesis, graph "
            "construction, classical estimators and attention-based models";

  // ----------------------------------------------------------- propagation
  py::class_<rf::PropagationParams>(m, "PropagationParams")
      .def(py::init<>())
      .def_readwrite("pl0_db", &rf::PropagationParams::pl0_db)
      .def_readwrite("gamma", &rf::PropagationParams::gamma)
      .def_readwrite("sigma_db", &rf::PropagationParams::sigma_db)
      .def_readwrite("d0_m", &rf::PropagationParams::d0_m)
      .def_readwrite("ambient_noise_dbm", &rf::PropagationParams::ambient_noise_dbm);

  py::class_<rf::JammerConfig>(m, "JammerConfig")
      .def(py::init<>())
      .def_property(
          "position",
          [](const rf::JammerConfig& j) {
            return std::array<double, 3>{j.position.x, j.position.y, j.position.z};
          },
          [](rf::JammerConfig& j, const std::array<double, 3>& p) { j.position = to_vec3(p); })
      .def_readwrite("tx_power_dbm", &rf::JammerConfig::tx_power_dbm)
      .def_readwrite("tx_gain_dbi", &rf::JammerConfig::tx_gain_dbi)
      .def_readwrite("rx_gain_dbi", &rf::JammerConfig::rx_gain_dbi);

  m.def("path_loss_ldpl", &rf::path_loss_ldpl, py::arg("distance_m"), py::arg("params"),
        py::arg("shadowing_db") = 0.0);
  m.def(
      "jammer_rssi",
      [](const std::array<double, 3>& device, const rf::JammerConfig& jam,
         const rf::PropagationParams& p, double shadow) {
        return rf::jammer_rssi(to_vec3(device), jam, p, shadow);
      },
      py::arg("device_pos"), py::arg("jammer"), py::arg("params"), py::arg("shadowing_db") = 0.0);
  m.def("noise_floor", &rf::noise_floor, py::arg("jammer_rssi_dbm"),
        py::arg("ambient_dbm") = rf::kAmbientNoiseDbm);

  // -------------------------------------------------------------- scenarios
  py::class_<scenario::MeasurementSample>(m, "MeasurementSample")
      .def(py::init<>())
      .def_property(
          "position",
          [](const scenario::MeasurementSample& s) {
            return std::array<double, 3>{s.position.x, s.position.y, s.position.z};
          },
          [](scenario::MeasurementSample& s, const std::array<double, 3>& p) {
            s.position = to_vec3(p);
          })
      .def_readwrite("noise_dbm", &scenario::MeasurementSample::noise_dbm)
      .def_readwrite("time_index", &scenario::MeasurementSample::time_index);

  py::class_<scenario::ScenarioInstance>(m, "ScenarioInstance")
      .def(py::init<>())
      .def_readwrite("samples", &scenario::ScenarioInstance::samples)
      .def_readwrite("jammer", &scenario::ScenarioInstance::jammer)
      .def_readwrite("propagation", &scenario::ScenarioInstance::propagation)
      .def_readwrite("dimensions", &scenario::ScenarioInstance::dimensions)
      .def_property_readonly("topology",
                             [](const scenario::ScenarioInstance& i) {
                               return scenario::to_string(i.topology);
                             })
      .def_property_readonly("placement",
                             [](const scenario::ScenarioInstance& i) {
                               return scenario::to_string(i.placement);
                             })
      .def_property_readonly("positions", &positions_of)
      .def("__len__", [](const scenario::ScenarioInstance& i) { return i.samples.size(); });

  m.def(
      "generate_static",
      [](const std::string& topology, const std::string& placement, int count, uint64_t seed) {
        return scenario::generate_static(scenario::topology_from_string(topology),
                                         scenario::placement_from_string(placement), count, seed);
      },
      py::arg("topology"), py::arg("placement"), py::arg("count"), py::arg("seed"));
  m.def(
      "generate_dynamic",
      [](int count, uint64_t seed) { return scenario::generate_dynamic(count, seed); },
      py::arg("count"), py::arg("seed"));
  m.def("write_dataset", &scenario::write_dataset, py::arg("instances"), py::arg("path"));
  m.def("read_dataset", &scenario::read_dataset, py::arg("path"));
  m.def("dataset_fingerprint", &scenario::dataset_fingerprint, py::arg("instances"));

  // ------------------------------------------------------------ downsampling
  m.def("window_average", &sampling::window_average, py::arg("samples"), py::arg("target_nodes"));
  m.def("spatial_bin_filter", &sampling::spatial_bin_filter, py::arg("samples"),
        py::arg("target_nodes"), py::arg("bin_size_m") = 1.0);

  // ----------------------------------------------------------------- graphs
  py::class_<graph::MeasurementGraph>(m, "MeasurementGraph")
      .def_readonly("node_features", &graph::MeasurementGraph::node_features)
      .def_readonly("edges", &graph::MeasurementGraph::edges)
      .def_readonly("edge_weights", &graph::MeasurementGraph::edge_weights)
      .def_readonly("supernode_index", &graph::MeasurementGraph::supernode_index)
      .def_property_readonly("num_nodes", &graph::MeasurementGraph::num_nodes)
      .def_property_readonly("wcl_position",
                             [](const graph::MeasurementGraph& g) {
                               return std::array<double, 3>{g.wcl_position_m.x, g.wcl_position_m.y,
                                                            g.wcl_position_m.z};
                             });

  m.def(
      "build_graph",
      [](const scenario::ScenarioInstance& inst, int k, bool supernode) {
        graph::GraphConfig cfg;
        cfg.k = k;
        if (inst.topology != scenario::Topology::kTrajectory) {
          cfg.static_transform = graph::NormalizationTransform::for_static_area(
              scenario::AreaBounds::static_default());
        }
        graph::MeasurementGraph g = graph::build_graph(inst, cfg);
        if (supernode) graph::attach_supernode(g, cfg);
        return g;
      },
      py::arg("instance"), py::arg("k") = 3, py::arg("supernode") = false);
  m.def("edge_weight", &graph::edge_weight, py::arg("normalized_distance"));

  // -------------------------------------------------------------- estimators
  py::class_<classical::EstimateResult>(m, "EstimateResult")
      .def_property_readonly("position",
                             [](const classical::EstimateResult& r) {
                               return std::array<double, 3>{r.position_m.x, r.position_m.y,
                                                            r.position_m.z};
                             })
      .def_property_readonly("estimator",
                             [](const classical::EstimateResult& r) {
                               return classical::to_string(r.estimator);
                             })
      .def_readonly("converged", &classical::EstimateResult::converged)
      .def_readonly("fallback", &classical::EstimateResult::fallback)
      .def_property_readonly("confidence", [](const classical::EstimateResult& r) {
        return r.confidence ? py::cast(*r.confidence) : py::object(py::none());
      });

  m.def(
      "estimate",
      [](const std::string& kind, const std::vector<scenario::MeasurementSample>& samples) {
        return classical::estimate(classical::estimator_from_string(kind), samples);
      },
      py::arg("estimator"), py::arg("samples"));

  // ---------------------------------------------------------------- training
  py::class_<gnn::TrainedModel>(m, "TrainedModel")
      .def_property_readonly("arch",
                             [](const gnn::TrainedModel& tm) {
                               return to_string(tm.model_config.arch);
                             })
      .def_property_readonly("train_loss",
                             [](const gnn::TrainedModel& tm) { return tm.history.train_loss; })
      .def_property_readonly("val_loss",
                             [](const gnn::TrainedModel& tm) { return tm.history.val_loss; })
      .def_property_readonly("best_epoch",
                             [](const gnn::TrainedModel& tm) { return tm.history.best_epoch; })
      .def_property_readonly("dataset_hash",
                             [](const gnn::TrainedModel& tm) { return tm.dataset_hash; })
      .def(
          "estimate",
          [](const gnn::TrainedModel& tm, const scenario::ScenarioInstance& inst) {
            auto est = eval::make_estimator(tm);
            return est->estimate(inst.samples, inst);
          },
          py::arg("instance"));

  m.def(
      "train",
      [](const std::string& arch, const std::vector<scenario::ScenarioInstance>& data, int epochs,
         uint64_t seed, int layers, int hidden_dim, int heads, int batch_size, int k,
         const std::string& loss, double lambda, int downsample_nodes) {
        gnn::ModelConfig mcfg = gnn::ModelConfig::defaults_for(gnn::arch_from_string(arch), 0);
        if (layers > 0) mcfg.layers = layers;
        if (hidden_dim > 0) {
          mcfg.hidden_dim = hidden_dim;
          mcfg.out_dim = hidden_dim;
        }
        if (heads > 0) mcfg.heads = heads;
        gnn::TrainConfig tcfg = gnn::TrainConfig::defaults_for(mcfg.arch);
        tcfg.epochs = epochs;
        tcfg.seed = seed;
        if (batch_size > 0) tcfg.batch_size = batch_size;
        if (!loss.empty()) tcfg.loss = gnn::loss_from_string(loss);
        tcfg.lambda = lambda;
        if (downsample_nodes > 0) tcfg.downsample.target_nodes = downsample_nodes;
        graph::GraphConfig gcfg;
        gcfg.k = k;
        if (!data.empty() && data.front().topology != scenario::Topology::kTrajectory) {
          gcfg.static_transform = graph::NormalizationTransform::for_static_area(
              scenario::AreaBounds::static_default());
          tcfg.crop_trajectories = false;
        }
        return gnn::train(mcfg, tcfg, gcfg, data);
      },
      py::arg("arch"), py::arg("data"), py::arg("epochs"), py::arg("seed") = 0,
      py::arg("layers") = 0, py::arg("hidden_dim") = 0, py::arg("heads") = 0,
      py::arg("batch_size") = 0, py::arg("k") = 3, py::arg("loss") = std::string(),
      py::arg("lambda_") = 0.0, py::arg("downsample_nodes") = 1000);

  m.def("save_checkpoint", &gnn::save_checkpoint, py::arg("model"), py::arg("path"));
  m.def("load_checkpoint", &gnn::load_checkpoint, py::arg("path"));

  // --------------------------------------------------------------- evaluation
  m.def(
      "evaluate",
      [](py::object estimator_or_model, const std::vector<scenario::ScenarioInstance>& data,
         int stride, int downsample_nodes) {
        std::unique_ptr<eval::Estimator> est;
        if (py::isinstance<py::str>(estimator_or_model)) {
          est = eval::make_estimator(
              classical::estimator_from_string(estimator_or_model.cast<std::string>()));
        } else {
          est = eval::make_estimator(estimator_or_model.cast<gnn::TrainedModel>());
        }
        eval::DynamicEvalOptions opts;
        opts.checkpoint_stride = stride;
        opts.downsample.target_nodes = downsample_nodes;
        const bool dynamic =
            !data.empty() && data.front().topology == scenario::Topology::kTrajectory;
        const eval::EvalReport report = dynamic ? eval::evaluate_dynamic(*est, data, opts)
                                                : eval::evaluate_static(*est, data);
        py::dict out;
        for (const auto& [name, agg] : report.splits) {
          out[py::str(name)] =
              py::make_tuple(agg.count, agg.rmse, agg.mae);
        }
        out["trajectory_mean_rmse"] = report.trajectory_mean_rmse;
        out["estimator"] = report.estimator;
        return out;
      },
      py::arg("estimator"), py::arg("data"), py::arg("stride") = 50,
      py::arg("downsample_nodes") = 1000);

  m.attr("PRNG_NAME") = Rng::kPrngName;
  m.attr("__version__") = "0.1.0";
}
