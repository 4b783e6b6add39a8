#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gailpen/dataset.hpp"
#include "gailpen/network.hpp"
#include "gailpen/state.hpp"

namespace gailpen {

enum class OptimizerKind { sgd_momentum, adam };

// How the initial state of a training rollout is built from a sampled expert
// trajectory: its first point only, or a uniformly random prefix length.
enum class PrefixMode { first_point, random_prefix };

struct TrainingConfig {
  int horizon = 50;
  double gamma = 0.9;          // discount on the successor value
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  double discriminator_lr = 1e-3;
  int batch_size = 32;         // shared by the three per-step updates
  int total_steps = 20000;
  double noise_scale = 0.05;   // additive gaussian action noise in rollouts
  double tau = 0.005;          // target-network mixing rate
  std::uint64_t seed = 0;
  int checkpoint_interval = 1000;
  int metrics_interval = 1;
  OptimizerKind optimizer = OptimizerKind::sgd_momentum;
  double momentum = 0.9;
  int episodes_per_step = 2;
  int replay_capacity = 4096;  // ring buffer of rollout transitions
  PrefixMode prefix_mode = PrefixMode::first_point;
  int workers = 1;             // rollout parallelism; 1 = fully serial

  void validate() const;  // throws std::invalid_argument
};

struct Transition {
  State s;
  Action a;
  State s_next;
};

struct Episode {
  std::vector<Transition> steps;
};

// reward = logit of the clamped discriminator probability; the clamp keeps
// the reward finite when the discriminator saturates.
inline constexpr double kRewardClampEps = 1e-6;
double reward_from_probability(double p);
double reward_of(const ParameterSet& disc_params, const State& s_next);

// Q(s, a) = reward(s') + gamma * V(s') with s' = env_step(s, a).
double q_value(const ParameterSet& critic_params,
               const ParameterSet& disc_params, const State& s,
               const Action& a, double gamma);

// Runs the actor from `initial` until the state is full. Actions are the
// actor output plus clamped gaussian noise; noise_scale 0 makes the rollout
// deterministic in the actor alone.
Episode rollout(const ParameterSet& actor_params, const State& initial,
                int horizon, double noise_scale, std::uint64_t seed);

// Loss value and its exact parameter gradients, both taken before any step.
struct LossAndGrads {
  double value = 0.0;
  ParameterSet grads;
};

// Mean binary cross-entropy of the discriminator on real states (label 1)
// and rolled-out states (label 0), averaged over the concatenated batch.
LossAndGrads discriminator_bce(const ParameterSet& disc_params,
                               std::span<const State> real_states,
                               std::span<const State> fake_states);

// Mean squared error between V(s) and the fixed per-state targets.
LossAndGrads critic_bellman(const ParameterSet& critic_params,
                            std::span<const State> states,
                            std::span<const double> targets);

// Detached Bellman targets reward(s') + gamma * V_target(s') for a batch of
// transitions. Throws train_error if any target is non-finite.
std::vector<double> critic_targets(const ParameterSet& disc_params,
                                   const ParameterSet& target_params,
                                   std::span<const Transition> transitions,
                                   double gamma);

// Mean Q(s, actor(s)) over the batch and its gradient with respect to the
// actor parameters. The chain runs through the explicit transition: the
// action becomes one slot of s', so the discriminator and critic input
// gradients at that slot drive the actor. Critic and discriminator are
// constants here.
LossAndGrads actor_q_objective(const ParameterSet& actor_params,
                               const ParameterSet& critic_params,
                               const ParameterSet& disc_params,
                               std::span<const State> states, double gamma);

// Single plain gradient steps. Each returns the pre-step loss/objective and
// leaves its inputs untouched; on a non-finite loss the update throws
// train_error without producing new parameters.
struct UpdateResult {
  ParameterSet params;
  double loss = 0.0;
};

UpdateResult update_discriminator(const ParameterSet& disc_params,
                                  std::span<const State> real_states,
                                  std::span<const State> fake_states,
                                  double lr);

struct CriticUpdate {
  ParameterSet params;
  ParameterSet target;
  double loss = 0.0;
};

// Descends the Bellman MSE, then softly mixes the target network:
// target <- (1 - tau) * target + tau * online.
CriticUpdate update_critic(const ParameterSet& critic_params,
                           const ParameterSet& disc_params,
                           std::span<const Transition> transitions,
                           double gamma, double lr,
                           const ParameterSet& target_params, double tau);

// Ascends the mean Q objective.
UpdateResult update_actor(const ParameterSet& actor_params,
                          const ParameterSet& critic_params,
                          const ParameterSet& disc_params,
                          std::span<const State> states, double gamma,
                          double lr);

// Descent optimizer over a ParameterSet; grads must be shaped like params.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, double momentum);

  void step(ParameterSet& params, const ParameterSet& grads);

 private:
  OptimizerKind kind_;
  double lr_;
  double momentum_;
  bool initialized_ = false;
  long t_ = 0;
  ParameterSet m_;  // momentum / first moment
  ParameterSet v_;  // second moment (adam)
};

struct StepMetrics {
  int step = 0;
  double discriminator_loss = 0.0;
  double critic_loss = 0.0;
  double actor_objective = 0.0;
  double mean_reward = 0.0;
  double mean_displacement = 0.0;
  double wall_seconds = 0.0;
};

// Where the training data came from, recorded in the run manifest.
struct DataProvenance {
  std::string path;
  std::uint64_t fingerprint = 0;
};

struct TrainResult {
  ParameterSet actor;
  ParameterSet critic;
  ParameterSet critic_target;
  ParameterSet discriminator;
  int steps_completed = 0;
};

// The full adversarial training loop. Per step: roll out the actor from
// expert-derived initial states, update the discriminator on expert prefixes
// vs rolled-out states of matching lengths, update the critic on replayed
// transitions against the target network, update the actor on the same
// batch. Writes metrics.jsonl, periodic checkpoints (atomic, one file per
// network named by step) and manifest.json under out_dir. Deterministic for
// a fixed config and dataset, apart from the logged wall-clock field.
TrainResult train_gail(const TrainingConfig& config, const Dataset& train_set,
                       const std::filesystem::path& out_dir,
                       const DataProvenance& provenance,
                       const std::function<void(const StepMetrics&)>&
                           on_metrics = {});

}  // namespace gailpen
