#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "gailpen/dataset.hpp"
#include "gailpen/trainer.hpp"

namespace gailpen {

struct PredictorMetrics {
  int step = 0;
  double loss = 0.0;
  double wall_seconds = 0.0;
};

struct PredictorResult {
  ParameterSet params;
  std::vector<double> losses;  // pre-step loss of every update step
};

// Supervised next-point baseline: an actor-shaped network trained to
// minimize the mean squared distance between its output and the true next
// point, over all (sample, prefix length) pairs with 1 <= t < T. Uses
// actor_lr, batch_size, total_steps, optimizer settings and seed from the
// config. Writes metrics.jsonl, periodic "predictor" checkpoints and
// manifest.json under out_dir.
PredictorResult train_predictor(const TrainingConfig& config,
                                const Dataset& train_set,
                                const std::filesystem::path& out_dir,
                                const DataProvenance& provenance,
                                const std::function<void(
                                    const PredictorMetrics&)>& on_metrics = {});

// Mean squared next-point distance of the predictor over every prefix of
// every trajectory in the set (the training objective, used for held-out
// evaluation).
double predictor_mse(const ParameterSet& params, const Dataset& data);

// Autoregressive generation: predict, append through the environment,
// repeat until the state is full.
Trajectory predict_rollout(const ParameterSet& params, const State& prefix,
                           int horizon);

}  // namespace gailpen
