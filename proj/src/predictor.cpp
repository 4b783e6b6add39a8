#include "gailpen/predictor.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "gailpen/checkpoint.hpp"
#include "gailpen/errors.hpp"
#include "gailpen/manifest.hpp"
#include "gailpen/rng.hpp"
#include "gailpen/version.hpp"

namespace gailpen {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

struct PairBatch {
  std::vector<State> states;
  std::vector<Point> targets;
};

// Squared-distance loss on a batch of (prefix state, next point) pairs and
// its exact parameter gradients.
LossAndGrads squared_error(const ParameterSet& params, const PairBatch& batch) {
  BatchWorkspace ws;
  ws.forward(params, batch.states);
  const auto n = static_cast<std::ptrdiff_t>(batch.states.size());
  const double inv_n = 1.0 / static_cast<double>(n);

  double loss = 0.0;
  Eigen::MatrixXd output_grad(2, n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double dx = ws.outputs()(0, static_cast<int>(i)) -
                      batch.targets[static_cast<std::size_t>(i)].x;
    const double dy = ws.outputs()(1, static_cast<int>(i)) -
                      batch.targets[static_cast<std::size_t>(i)].y;
    loss += dx * dx + dy * dy;
    output_grad(0, static_cast<int>(i)) = 2.0 * dx * inv_n;
    output_grad(1, static_cast<int>(i)) = 2.0 * dy * inv_n;
  }
  loss *= inv_n;

  return {loss, ws.param_gradients(ws.squash_backward(output_grad))};
}

}  // namespace

double predictor_mse(const ParameterSet& params, const Dataset& data) {
  require(!data.samples.empty(), "predictor_mse: empty dataset");
  require(params.spec.output_dim == 2 &&
              params.spec.squash == Squash::logistic,
          "predictor_mse: not an actor-shaped parameter set");
  require(params.spec.sequence_length == data.horizon,
          "predictor_mse: horizon mismatch");
  const int T = data.horizon;

  BatchWorkspace ws;
  double total = 0.0;
  std::size_t count = 0;
  std::vector<State> states;
  for (const Trajectory& traj : data.samples) {
    states.clear();
    for (int t = 1; t < T; ++t) {
      states.push_back(
          make_state({traj.points.data(), static_cast<std::size_t>(t)}, T));
    }
    ws.forward(params, states);
    for (int t = 1; t < T; ++t) {
      const double dx = ws.outputs()(0, t - 1) -
                        traj.points[static_cast<std::size_t>(t)].x;
      const double dy = ws.outputs()(1, t - 1) -
                        traj.points[static_cast<std::size_t>(t)].y;
      total += dx * dx + dy * dy;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

PredictorResult train_predictor(const TrainingConfig& config,
                                const Dataset& train_set,
                                const std::filesystem::path& out_dir,
                                const DataProvenance& provenance,
                                const std::function<void(
                                    const PredictorMetrics&)>& on_metrics) {
  config.validate();
  require(!train_set.samples.empty(), "train_predictor: empty training set");
  require(train_set.horizon == config.horizon,
          "train_predictor: dataset horizon does not match config");

  std::filesystem::create_directories(out_dir);

  const int T = config.horizon;
  const auto n_samples = static_cast<std::uint64_t>(train_set.samples.size());
  Rng root(config.seed);

  ParameterSet params = init_params(actor_spec(T), root.child(1).seed());
  Optimizer opt(config.optimizer, config.actor_lr, config.momentum);

  write_json_file(out_dir / "manifest.json",
                  {{"model_kind", "predictor"},
                   {"config", config_json(config)},
                   {"data", provenance_json(provenance)},
                   {"created", iso_utc_timestamp()},
                   {"version", std::string(kVersion)}});

  std::ofstream metrics(out_dir / "metrics.jsonl",
                        std::ios::trunc | std::ios::binary);
  if (!metrics) {
    throw io_error((out_dir / "metrics.jsonl").string(), "cannot open");
  }

  const auto save = [&](int step) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "predictor_%06d.ckpt", step);
    save_checkpoint(out_dir / buf, params,
                    {"predictor", config.seed, step, ""});
  };
  save(0);

  PredictorResult result;
  const auto start = std::chrono::steady_clock::now();

  for (int step = 1; step <= config.total_steps; ++step) {
    Rng step_rng = root.child(16 + static_cast<std::uint64_t>(step));

    PairBatch batch;
    for (int b = 0; b < config.batch_size; ++b) {
      const auto& traj =
          train_set.samples[static_cast<std::size_t>(
              step_rng.uniform_index(n_samples))];
      const int t = step_rng.uniform_int(1, T - 1);
      batch.states.push_back(
          make_state({traj.points.data(), static_cast<std::size_t>(t)}, T));
      batch.targets.push_back(traj.points[static_cast<std::size_t>(t)]);
    }

    LossAndGrads lg = squared_error(params, batch);
    if (!std::isfinite(lg.value) || !lg.grads.all_finite()) {
      throw train_error("train_predictor: non-finite loss or gradient");
    }
    opt.step(params, lg.grads);
    result.losses.push_back(lg.value);

    if (step % config.metrics_interval == 0 || step == config.total_steps) {
      PredictorMetrics m;
      m.step = step;
      m.loss = lg.value;
      m.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      const nlohmann::json record = {
          {"step", m.step}, {"loss", m.loss}, {"wall_seconds", m.wall_seconds}};
      metrics << record.dump() << '\n';
      metrics.flush();
      if (on_metrics) on_metrics(m);
    }
    if (step % config.checkpoint_interval == 0 ||
        step == config.total_steps) {
      save(step);
    }
  }

  result.params = std::move(params);
  return result;
}

Trajectory predict_rollout(const ParameterSet& params, const State& prefix,
                           int horizon) {
  require(params.spec.output_dim == 2 &&
              params.spec.squash == Squash::logistic,
          "predict_rollout: not an actor-shaped parameter set");
  require(prefix.horizon() == horizon &&
              params.spec.sequence_length == horizon,
          "predict_rollout: horizon mismatch");
  if (prefix.full()) {
    throw episode_complete("predict_rollout: prefix is already full");
  }

  State s = prefix;
  while (!s.full()) {
    s = env_step(s, actor_forward(params, s));
  }
  Trajectory out;
  out.points.assign(s.prefix().begin(), s.prefix().end());
  return out;
}

}  // namespace gailpen
