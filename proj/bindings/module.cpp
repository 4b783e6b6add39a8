// Python module exposing the environment, the three networks, training,
// and the evaluation toolkit. Points cross the boundary as (x, y) tuples,
// matrices as numpy arrays.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gailpen/checkpoint.hpp"
#include "gailpen/dataset.hpp"
#include "gailpen/errors.hpp"
#include "gailpen/evaluation.hpp"
#include "gailpen/manifest.hpp"
#include "gailpen/network.hpp"
#include "gailpen/predictor.hpp"
#include "gailpen/state.hpp"
#include "gailpen/synthetic.hpp"
#include "gailpen/trainer.hpp"
#include "gailpen/version.hpp"

namespace py = pybind11;
using namespace gailpen;

namespace {

using PyPoint = std::pair<double, double>;

std::vector<Point> to_points(const std::vector<PyPoint>& v) {
  std::vector<Point> out;
  out.reserve(v.size());
  for (const auto& [x, y] : v) out.push_back({x, y});
  return out;
}

std::vector<PyPoint> from_points(std::span<const Point> v) {
  std::vector<PyPoint> out;
  out.reserve(v.size());
  for (const Point& p : v) out.emplace_back(p.x, p.y);
  return out;
}

std::string split_name(Split split) {
  return split == Split::train ? "train" : "test";
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  throw std::invalid_argument("split must be 'train' or 'test'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Pen-trajectory imitation: explicit environment, convolutional "
      "actor/critic/discriminator, adversarial training and the curvature "
      "evaluation protocol";
  m.attr("__version__") = std::string(kVersion);

  py::register_exception<episode_complete>(m, "EpisodeComplete",
                                           PyExc_RuntimeError);
  py::register_exception<parse_error>(m, "ParseError", PyExc_ValueError);
  py::register_exception<io_error>(m, "IoError", PyExc_OSError);
  py::register_exception<train_error>(m, "TrainError", PyExc_RuntimeError);

  // ------------------------------------------------------------- state --
  py::class_<State>(m, "State")
      .def_property_readonly("horizon", &State::horizon)
      .def_property_readonly("length", &State::length)
      .def_property_readonly("full", &State::full)
      .def("prefix", [](const State& s) { return from_points(s.prefix()); })
      .def("__eq__",
           [](const State& a, const State& b) { return a == b; })
      .def("__repr__", [](const State& s) {
        return "State(length=" + std::to_string(s.length()) +
               ", horizon=" + std::to_string(s.horizon()) + ")";
      });

  m.def(
      "make_state",
      [](const std::vector<PyPoint>& prefix, int horizon) {
        return make_state(to_points(prefix), horizon);
      },
      py::arg("prefix"), py::arg("horizon"),
      "Zero-padded state holding the given prefix");
  m.def(
      "env_step",
      [](const State& state, const PyPoint& action) {
        return env_step(state, Action{{action.first, action.second}});
      },
      py::arg("state"), py::arg("action"),
      "Deterministic transition appending the action point");

  // ---------------------------------------------------------- networks --
  py::class_<NetworkSpec>(m, "NetworkSpec")
      .def_readonly("sequence_length", &NetworkSpec::sequence_length)
      .def_readonly("output_dim", &NetworkSpec::output_dim)
      .def_property_readonly("squash",
                             [](const NetworkSpec& s) {
                               return s.squash == Squash::logistic
                                          ? "logistic"
                                          : "identity";
                             })
      .def("__eq__", [](const NetworkSpec& a, const NetworkSpec& b) {
        return a == b;
      });
  m.def("actor_spec", &actor_spec, py::arg("sequence_length"));
  m.def("critic_spec", &critic_spec, py::arg("sequence_length"));
  m.def("discriminator_spec", &discriminator_spec, py::arg("sequence_length"));

  py::class_<ParameterSet>(m, "ParameterSet")
      .def_readonly("spec", &ParameterSet::spec)
      .def("total_size", &ParameterSet::total_size)
      .def("all_finite", &ParameterSet::all_finite);
  m.def("init_params", &init_params, py::arg("spec"), py::arg("seed"),
        "Seed-deterministic uniform initialization");

  m.def(
      "actor_forward",
      [](const ParameterSet& p, const State& s) {
        const Action a = actor_forward(p, s);
        return PyPoint{a.point.x, a.point.y};
      },
      py::arg("params"), py::arg("state"));
  m.def("critic_forward", &critic_forward, py::arg("params"),
        py::arg("state"));
  m.def("discriminator_forward", &discriminator_forward, py::arg("params"),
        py::arg("state"));

  // -------------------------------------------------------- checkpoints --
  m.def(
      "save_checkpoint",
      [](const std::string& path, const ParameterSet& params,
         const std::string& kind, std::uint64_t seed, int step) {
        save_checkpoint(path, params, CheckpointMeta{kind, seed, step, ""});
      },
      py::arg("path"), py::arg("params"), py::arg("kind") = "",
      py::arg("seed") = 0, py::arg("step") = 0);
  m.def(
      "load_checkpoint",
      [](const std::string& path) {
        const Checkpoint ck = load_checkpoint(path);
        py::dict meta;
        meta["kind"] = ck.meta.kind;
        meta["seed"] = ck.meta.seed;
        meta["step"] = ck.meta.step;
        meta["version"] = ck.meta.version;
        return py::make_tuple(ck.params, meta);
      },
      py::arg("path"), "Returns (params, meta dict)");

  // ------------------------------------------------------------ dataset --
  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init([](const std::vector<PyPoint>& points,
                       const std::string& label, const std::string& id) {
             Trajectory t;
             t.points = to_points(points);
             t.label = label;
             t.id = id;
             return t;
           }),
           py::arg("points"), py::arg("label") = "", py::arg("id") = "")
      .def_property_readonly(
          "points", [](const Trajectory& t) { return from_points(t.points); })
      .def_readwrite("label", &Trajectory::label)
      .def_readwrite("id", &Trajectory::id)
      .def("__len__", [](const Trajectory& t) { return t.points.size(); })
      .def("__repr__", [](const Trajectory& t) {
        return "Trajectory(id='" + t.id + "', label='" + t.label + "', " +
               std::to_string(t.points.size()) + " points)";
      });

  py::class_<RawSample>(m, "RawSample")
      .def(py::init([](const std::string& id, const std::string& label,
                       const std::vector<std::vector<PyPoint>>& strokes) {
             RawSample s;
             s.id = id;
             s.label = label;
             for (const auto& stroke : strokes) s.strokes.push_back(to_points(stroke));
             return s;
           }),
           py::arg("id"), py::arg("label"), py::arg("strokes"))
      .def_readwrite("id", &RawSample::id)
      .def_readwrite("label", &RawSample::label)
      .def_property_readonly("strokes", [](const RawSample& s) {
        std::vector<std::vector<PyPoint>> out;
        for (const auto& stroke : s.strokes) out.push_back(from_points(stroke));
        return out;
      });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("horizon", &Dataset::horizon)
      .def_property(
          "split", [](const Dataset& d) { return split_name(d.split); },
          [](Dataset& d, const std::string& name) {
            d.split = split_from_name(name);
          })
      .def_readwrite("seed", &Dataset::seed)
      .def_readwrite("samples", &Dataset::samples)
      .def("__len__", [](const Dataset& d) { return d.samples.size(); });

  m.def(
      "build_dataset",
      [](const std::vector<RawSample>& raw, int horizon, double train_fraction,
         std::uint64_t seed) {
        BuildResult r = build_dataset(raw, horizon, train_fraction, seed);
        return py::make_tuple(std::move(r.train), std::move(r.test),
                              r.dropped);
      },
      py::arg("raw"), py::arg("horizon"), py::arg("train_fraction"),
      py::arg("seed"), "Returns (train, test, dropped_count)");
  m.def(
      "write_dataset",
      [](const Dataset& d, const std::string& path) {
        write_dataset(d, path);
      },
      py::arg("dataset"), py::arg("path"));
  m.def(
      "load_dataset",
      [](const std::string& path) { return load_dataset(path); },
      py::arg("path"));
  m.def(
      "synthesize_experts",
      [](int count, std::uint64_t seed, int points_per_sample,
         double line_fraction) {
        SyntheticConfig config;
        config.count = count;
        config.seed = seed;
        config.points_per_sample = points_per_sample;
        config.line_fraction = line_fraction;
        return synthesize_experts(config);
      },
      py::arg("count"), py::arg("seed") = 0,
      py::arg("points_per_sample") = 120, py::arg("line_fraction") = 0.6,
      "Straight segments mixed with constant-curvature arcs");

  // ----------------------------------------------------------- training --
  py::class_<TrainingConfig>(m, "TrainingConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &TrainingConfig::horizon)
      .def_readwrite("gamma", &TrainingConfig::gamma)
      .def_readwrite("actor_lr", &TrainingConfig::actor_lr)
      .def_readwrite("critic_lr", &TrainingConfig::critic_lr)
      .def_readwrite("discriminator_lr", &TrainingConfig::discriminator_lr)
      .def_readwrite("batch_size", &TrainingConfig::batch_size)
      .def_readwrite("total_steps", &TrainingConfig::total_steps)
      .def_readwrite("noise_scale", &TrainingConfig::noise_scale)
      .def_readwrite("tau", &TrainingConfig::tau)
      .def_readwrite("seed", &TrainingConfig::seed)
      .def_readwrite("checkpoint_interval", &TrainingConfig::checkpoint_interval)
      .def_readwrite("metrics_interval", &TrainingConfig::metrics_interval)
      .def_property(
          "optimizer",
          [](const TrainingConfig& c) { return optimizer_name(c.optimizer); },
          [](TrainingConfig& c, const std::string& name) {
            c.optimizer = optimizer_from_name(name);
          })
      .def_readwrite("momentum", &TrainingConfig::momentum)
      .def_readwrite("episodes_per_step", &TrainingConfig::episodes_per_step)
      .def_readwrite("replay_capacity", &TrainingConfig::replay_capacity)
      .def_property(
          "prefix_mode",
          [](const TrainingConfig& c) {
            return prefix_mode_name(c.prefix_mode);
          },
          [](TrainingConfig& c, const std::string& name) {
            c.prefix_mode = prefix_mode_from_name(name);
          })
      .def_readwrite("workers", &TrainingConfig::workers)
      .def("validate", &TrainingConfig::validate);

  py::class_<Transition>(m, "Transition")
      .def_readonly("state", &Transition::s)
      .def_property_readonly(
          "action",
          [](const Transition& t) {
            return PyPoint{t.a.point.x, t.a.point.y};
          })
      .def_readonly("next_state", &Transition::s_next);
  py::class_<Episode>(m, "Episode")
      .def_readonly("steps", &Episode::steps)
      .def("__len__", [](const Episode& e) { return e.steps.size(); });

  m.def("reward_of", &reward_of, py::arg("disc_params"), py::arg("next_state"),
        "Logit of the clamped discriminator probability");
  m.def(
      "q_value",
      [](const ParameterSet& critic, const ParameterSet& disc, const State& s,
         const PyPoint& a, double gamma) {
        return q_value(critic, disc, s, Action{{a.first, a.second}}, gamma);
      },
      py::arg("critic_params"), py::arg("disc_params"), py::arg("state"),
      py::arg("action"), py::arg("gamma"));
  m.def("rollout", &rollout, py::arg("actor_params"), py::arg("initial"),
        py::arg("horizon"), py::arg("noise_scale"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>(),
        "Runs the actor until the state is full");

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("actor", &TrainResult::actor)
      .def_readonly("critic", &TrainResult::critic)
      .def_readonly("critic_target", &TrainResult::critic_target)
      .def_readonly("discriminator", &TrainResult::discriminator)
      .def_readonly("steps_completed", &TrainResult::steps_completed);
  m.def(
      "train_gail",
      [](const TrainingConfig& config, const Dataset& train_set,
         const std::string& out_dir, const std::string& data_path) {
        DataProvenance provenance{data_path, 0};
        if (!data_path.empty()) {
          provenance.fingerprint = fingerprint_file(data_path);
        }
        py::gil_scoped_release release;
        return train_gail(config, train_set, out_dir, provenance);
      },
      py::arg("config"), py::arg("train_set"), py::arg("out_dir"),
      py::arg("data_path") = "",
      "Adversarial training; writes metrics, checkpoints and a manifest");

  py::class_<PredictorResult>(m, "PredictorResult")
      .def_readonly("params", &PredictorResult::params)
      .def_readonly("losses", &PredictorResult::losses);
  m.def(
      "train_predictor",
      [](const TrainingConfig& config, const Dataset& train_set,
         const std::string& out_dir, const std::string& data_path) {
        DataProvenance provenance{data_path, 0};
        if (!data_path.empty()) {
          provenance.fingerprint = fingerprint_file(data_path);
        }
        py::gil_scoped_release release;
        return train_predictor(config, train_set, out_dir, provenance);
      },
      py::arg("config"), py::arg("train_set"), py::arg("out_dir"),
      py::arg("data_path") = "",
      "Supervised next-point baseline; same artifact layout as train_gail");
  m.def("predictor_mse", &predictor_mse, py::arg("params"), py::arg("data"),
        py::call_guard<py::gil_scoped_release>());
  m.def("predict_rollout", &predict_rollout, py::arg("params"),
        py::arg("prefix"), py::arg("horizon"),
        py::call_guard<py::gil_scoped_release>());

  // --------------------------------------------------------- evaluation --
  m.def(
      "curvature_at",
      [](const std::vector<PyPoint>& points, int t, int delta) {
        Trajectory traj;
        traj.points = to_points(points);
        return curvature_at(traj, t, delta);
      },
      py::arg("points"), py::arg("t"), py::arg("delta"),
      "1/r of the circumcircle through points t-delta, t, t+delta");

  py::class_<CurvatureHistogram>(m, "CurvatureHistogram")
      .def_readonly("delta_max", &CurvatureHistogram::delta_max)
      .def_readonly("bins", &CurvatureHistogram::bins)
      .def_readonly("kappa_max", &CurvatureHistogram::kappa_max)
      .def_readonly("matrix", &CurvatureHistogram::matrix);
  m.def(
      "curvature_histogram",
      [](const std::vector<Trajectory>& trajs, int t_lo, int t_hi,
         int delta_max, int bins, double kappa_max) {
        return curvature_histogram(trajs, t_lo, t_hi, delta_max, bins,
                                   kappa_max);
      },
      py::arg("trajectories"), py::arg("t_lo"), py::arg("t_hi"),
      py::arg("delta_max"), py::arg("bins"), py::arg("kappa_max"),
      "Per-scale normalized curvature histograms over [t_lo, t_hi)");
  m.def("histogram_distance", &histogram_distance, py::arg("a"), py::arg("b"),
        "Mean per-scale total-variation distance");
  m.def(
      "write_histogram",
      [](const CurvatureHistogram& h, const std::string& path) {
        write_histogram(h, path);
      },
      py::arg("histogram"), py::arg("path"));
  m.def(
      "read_histogram",
      [](const std::string& path) { return read_histogram(path); },
      py::arg("path"));

  py::class_<QMap>(m, "QMap")
      .def_readonly("grid", &QMap::grid)
      .def_readonly("gamma", &QMap::gamma)
      .def_readonly("values", &QMap::values)
      .def_readonly("state", &QMap::state);
  m.def("qmap", &qmap, py::arg("critic_params"), py::arg("disc_params"),
        py::arg("state"), py::arg("grid"), py::arg("gamma"),
        py::arg("workers") = 1, py::call_guard<py::gil_scoped_release>(),
        "Q at the center of every grid cell for one fixed state");
  m.def(
      "write_qmap",
      [](const QMap& map, const std::string& path) { write_qmap(map, path); },
      py::arg("qmap"), py::arg("path"));
  m.def(
      "read_qmap", [](const std::string& path) { return read_qmap(path); },
      py::arg("path"));

  m.def("generate_from_prefix", &generate_from_prefix, py::arg("actor_params"),
        py::arg("source"), py::arg("t0"),
        py::call_guard<py::gil_scoped_release>(),
        "Copies t0 points, then extends with a noiseless rollout");
}
