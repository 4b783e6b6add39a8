#include "gailpen/trainer.hpp"

#include <algorithm>
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

void check_kind(const ParameterSet& params, int output_dim, Squash squash,
                const char* what) {
  if (params.spec.output_dim != output_dim || params.spec.squash != squash) {
    throw std::invalid_argument(std::string(what) +
                                ": parameter set has the wrong head");
  }
}

void ensure_finite(const LossAndGrads& lg, const char* what) {
  if (!std::isfinite(lg.value) || !lg.grads.all_finite()) {
    throw train_error(std::string(what) + ": non-finite loss or gradient");
  }
}

// dst += alpha * src, elementwise over every parameter array.
void axpy(ParameterSet& dst, double alpha, const ParameterSet& src) {
  auto d = dst.arrays();
  const auto s = src.arrays();
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::ptrdiff_t j = 0; j < d[i].size; ++j) {
      d[i].data[j] += alpha * s[i].data[j];
    }
  }
}

void soft_mix(ParameterSet& target, const ParameterSet& online, double tau) {
  auto t = target.arrays();
  const auto o = online.arrays();
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::ptrdiff_t j = 0; j < t[i].size; ++j) {
      t[i].data[j] = (1.0 - tau) * t[i].data[j] + tau * o[i].data[j];
    }
  }
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// The log argument is clamped so a saturated discriminator reports a large
// finite loss instead of infinity; gradients use the raw probability.
double safe_log(double v) { return std::log(std::max(v, 1e-12)); }

struct TargetsAndRewards {
  std::vector<double> targets;
  std::vector<double> rewards;
};

TargetsAndRewards targets_and_rewards(const ParameterSet& disc_params,
                                      const ParameterSet& target_params,
                                      std::span<const Transition> transitions,
                                      double gamma) {
  require(!transitions.empty(), "critic_targets: empty transition batch");
  check_kind(disc_params, 1, Squash::logistic, "critic_targets");
  check_kind(target_params, 1, Squash::identity, "critic_targets");

  std::vector<State> successors;
  successors.reserve(transitions.size());
  for (const Transition& t : transitions) successors.push_back(t.s_next);

  BatchWorkspace disc_ws;
  disc_ws.forward(disc_params, successors);
  BatchWorkspace value_ws;
  value_ws.forward(target_params, successors);

  TargetsAndRewards out;
  out.targets.resize(transitions.size());
  out.rewards.resize(transitions.size());
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const double r = reward_from_probability(
        disc_ws.outputs()(0, static_cast<int>(i)));
    const double v = value_ws.outputs()(0, static_cast<int>(i));
    out.rewards[i] = r;
    out.targets[i] = r + gamma * v;
    if (!std::isfinite(out.targets[i])) {
      throw train_error("critic_targets: non-finite Bellman target");
    }
  }
  return out;
}

std::string step_file(const char* stem, int step) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d.ckpt", stem, step);
  return buf;
}

// Advances every unfinished episode by one actor step, batching the forward
// pass across episodes. Per-episode noise comes from that episode's own
// stream, so results do not depend on how episodes are interleaved.
std::vector<Episode> run_episodes(const ParameterSet& actor_params,
                                  std::vector<State> states,
                                  double noise_scale, std::vector<Rng>& rngs) {
  std::vector<Episode> episodes(states.size());
  BatchWorkspace ws;
  std::vector<int> active;
  std::vector<State> batch;
  for (;;) {
    active.clear();
    for (std::size_t i = 0; i < states.size(); ++i) {
      if (!states[i].full()) active.push_back(static_cast<int>(i));
    }
    if (active.empty()) break;
    batch.clear();
    for (const int i : active) batch.push_back(states[static_cast<std::size_t>(i)]);
    ws.forward(actor_params, batch);
    for (std::size_t k = 0; k < active.size(); ++k) {
      const auto i = static_cast<std::size_t>(active[k]);
      double x = ws.outputs()(0, static_cast<int>(k));
      double y = ws.outputs()(1, static_cast<int>(k));
      if (noise_scale > 0.0) {
        x = clamp01(x + noise_scale * rngs[i].gaussian());
        y = clamp01(y + noise_scale * rngs[i].gaussian());
      }
      const Action a{{x, y}};
      State next = env_step(states[i], a);
      episodes[i].steps.push_back({states[i], a, next});
      states[i] = std::move(next);
    }
  }
  return episodes;
}

}  // namespace

void TrainingConfig::validate() const {
  require(horizon >= 2, "config: horizon must be at least 2");
  require(gamma >= 0.0 && gamma < 1.0, "config: gamma must lie in [0, 1)");
  require(actor_lr > 0.0 && critic_lr > 0.0 && discriminator_lr > 0.0,
          "config: learning rates must be positive");
  require(batch_size >= 1, "config: batch_size must be positive");
  require(total_steps >= 0, "config: total_steps must be nonnegative");
  require(noise_scale >= 0.0, "config: noise_scale must be nonnegative");
  require(tau > 0.0 && tau <= 1.0, "config: tau must lie in (0, 1]");
  require(checkpoint_interval >= 1, "config: checkpoint_interval must be positive");
  require(metrics_interval >= 1, "config: metrics_interval must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "config: momentum must lie in [0, 1)");
  require(episodes_per_step >= 1, "config: episodes_per_step must be positive");
  require(replay_capacity >= 1, "config: replay_capacity must be positive");
  require(workers >= 1, "config: workers must be positive");
}

double reward_from_probability(double p) {
  const double c =
      std::min(1.0 - kRewardClampEps, std::max(kRewardClampEps, p));
  return std::log(c / (1.0 - c));
}

double reward_of(const ParameterSet& disc_params, const State& s_next) {
  return reward_from_probability(discriminator_forward(disc_params, s_next));
}

double q_value(const ParameterSet& critic_params,
               const ParameterSet& disc_params, const State& s,
               const Action& a, double gamma) {
  const State s_next = env_step(s, a);
  return reward_of(disc_params, s_next) +
         gamma * critic_forward(critic_params, s_next);
}

Episode rollout(const ParameterSet& actor_params, const State& initial,
                int horizon, double noise_scale, std::uint64_t seed) {
  check_kind(actor_params, 2, Squash::logistic, "rollout");
  require(initial.horizon() == horizon &&
              actor_params.spec.sequence_length == horizon,
          "rollout: horizon mismatch");
  require(noise_scale >= 0.0, "rollout: negative noise scale");
  if (initial.full()) throw episode_complete("rollout: initial state is full");

  Rng rng(seed);
  Episode ep;
  State s = initial;
  while (!s.full()) {
    Action a = actor_forward(actor_params, s);
    if (noise_scale > 0.0) {
      a.point.x = clamp01(a.point.x + noise_scale * rng.gaussian());
      a.point.y = clamp01(a.point.y + noise_scale * rng.gaussian());
    }
    State next = env_step(s, a);
    ep.steps.push_back({s, a, next});
    s = std::move(next);
  }
  return ep;
}

LossAndGrads discriminator_bce(const ParameterSet& disc_params,
                               std::span<const State> real_states,
                               std::span<const State> fake_states) {
  check_kind(disc_params, 1, Squash::logistic, "discriminator_bce");
  require(!real_states.empty() && !fake_states.empty(),
          "discriminator_bce: empty batch");

  std::vector<State> all;
  all.reserve(real_states.size() + fake_states.size());
  all.insert(all.end(), real_states.begin(), real_states.end());
  all.insert(all.end(), fake_states.begin(), fake_states.end());
  const auto n = static_cast<std::ptrdiff_t>(all.size());
  const auto n_real = static_cast<std::ptrdiff_t>(real_states.size());

  BatchWorkspace ws;
  ws.forward(disc_params, all);

  double loss = 0.0;
  Eigen::MatrixXd presquash_grad(1, n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double p = ws.outputs()(0, static_cast<int>(i));
    const double label = i < n_real ? 1.0 : 0.0;
    loss -= label * safe_log(p) + (1.0 - label) * safe_log(1.0 - p);
    presquash_grad(0, static_cast<int>(i)) =
        (p - label) / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);

  return {loss, ws.param_gradients(presquash_grad)};
}

LossAndGrads critic_bellman(const ParameterSet& critic_params,
                            std::span<const State> states,
                            std::span<const double> targets) {
  check_kind(critic_params, 1, Squash::identity, "critic_bellman");
  require(!states.empty(), "critic_bellman: empty batch");
  require(states.size() == targets.size(),
          "critic_bellman: states and targets differ in length");

  BatchWorkspace ws;
  ws.forward(critic_params, states);

  const auto n = static_cast<std::ptrdiff_t>(states.size());
  double loss = 0.0;
  Eigen::MatrixXd presquash_grad(1, n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double residual =
        ws.outputs()(0, static_cast<int>(i)) - targets[static_cast<std::size_t>(i)];
    loss += residual * residual;
    presquash_grad(0, static_cast<int>(i)) =
        2.0 * residual / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);

  return {loss, ws.param_gradients(presquash_grad)};
}

std::vector<double> critic_targets(const ParameterSet& disc_params,
                                   const ParameterSet& target_params,
                                   std::span<const Transition> transitions,
                                   double gamma) {
  return targets_and_rewards(disc_params, target_params, transitions, gamma)
      .targets;
}

LossAndGrads actor_q_objective(const ParameterSet& actor_params,
                               const ParameterSet& critic_params,
                               const ParameterSet& disc_params,
                               std::span<const State> states, double gamma) {
  check_kind(actor_params, 2, Squash::logistic, "actor_q_objective");
  check_kind(critic_params, 1, Squash::identity, "actor_q_objective");
  check_kind(disc_params, 1, Squash::logistic, "actor_q_objective");
  require(!states.empty(), "actor_q_objective: empty batch");
  for (const State& s : states) {
    if (s.full()) {
      throw episode_complete("actor_q_objective: state already full");
    }
  }

  const int T = actor_params.spec.sequence_length;
  const auto n = static_cast<std::ptrdiff_t>(states.size());
  const double inv_n = 1.0 / static_cast<double>(n);

  BatchWorkspace actor_ws;
  actor_ws.forward(actor_params, states);

  std::vector<State> successors;
  successors.reserve(states.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Action a{{actor_ws.outputs()(0, static_cast<int>(i)),
                    actor_ws.outputs()(1, static_cast<int>(i))}};
    successors.push_back(env_step(states[static_cast<std::size_t>(i)], a));
  }

  BatchWorkspace disc_ws;
  disc_ws.forward(disc_params, successors);
  BatchWorkspace critic_ws;
  critic_ws.forward(critic_params, successors);

  double objective = 0.0;
  Eigen::MatrixXd disc_grad(1, n);
  Eigen::MatrixXd critic_grad(1, n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double p = disc_ws.outputs()(0, static_cast<int>(i));
    const double v = critic_ws.outputs()(0, static_cast<int>(i));
    objective += reward_from_probability(p) + gamma * v;
    // logit(clamp(sigmoid(z))) has slope 1 in z until the clamp saturates
    const bool saturated = p <= kRewardClampEps || p >= 1.0 - kRewardClampEps;
    disc_grad(0, static_cast<int>(i)) = saturated ? 0.0 : inv_n;
    critic_grad(0, static_cast<int>(i)) = gamma * inv_n;
  }
  objective *= inv_n;

  const Eigen::MatrixXd d_disc_input = disc_ws.input_gradients(disc_grad);
  const Eigen::MatrixXd d_critic_input = critic_ws.input_gradients(critic_grad);

  // The action occupies one slot of each successor state, so the objective's
  // gradient with respect to the action is the sum of both input gradients
  // at that slot's (x, y) rows.
  Eigen::MatrixXd action_grad(2, n);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const int col = static_cast<int>(i) * T +
                    states[static_cast<std::size_t>(i)].length();
    action_grad(0, static_cast<int>(i)) =
        d_disc_input(0, col) + d_critic_input(0, col);
    action_grad(1, static_cast<int>(i)) =
        d_disc_input(1, col) + d_critic_input(1, col);
  }

  const Eigen::MatrixXd actor_presquash = actor_ws.squash_backward(action_grad);
  return {objective, actor_ws.param_gradients(actor_presquash)};
}

UpdateResult update_discriminator(const ParameterSet& disc_params,
                                  std::span<const State> real_states,
                                  std::span<const State> fake_states,
                                  double lr) {
  require(lr > 0.0, "update_discriminator: lr must be positive");
  LossAndGrads lg = discriminator_bce(disc_params, real_states, fake_states);
  ensure_finite(lg, "update_discriminator");
  UpdateResult out{disc_params, lg.value};
  axpy(out.params, -lr, lg.grads);
  return out;
}

CriticUpdate update_critic(const ParameterSet& critic_params,
                           const ParameterSet& disc_params,
                           std::span<const Transition> transitions,
                           double gamma, double lr,
                           const ParameterSet& target_params, double tau) {
  require(lr > 0.0, "update_critic: lr must be positive");
  require(tau > 0.0 && tau <= 1.0, "update_critic: tau must lie in (0, 1]");
  const std::vector<double> targets =
      critic_targets(disc_params, target_params, transitions, gamma);
  std::vector<State> states;
  states.reserve(transitions.size());
  for (const Transition& t : transitions) states.push_back(t.s);

  LossAndGrads lg = critic_bellman(critic_params, states, targets);
  ensure_finite(lg, "update_critic");

  CriticUpdate out{critic_params, target_params, lg.value};
  axpy(out.params, -lr, lg.grads);
  soft_mix(out.target, out.params, tau);
  return out;
}

UpdateResult update_actor(const ParameterSet& actor_params,
                          const ParameterSet& critic_params,
                          const ParameterSet& disc_params,
                          std::span<const State> states, double gamma,
                          double lr) {
  require(lr > 0.0, "update_actor: lr must be positive");
  LossAndGrads lg =
      actor_q_objective(actor_params, critic_params, disc_params, states, gamma);
  ensure_finite(lg, "update_actor");
  UpdateResult out{actor_params, lg.value};
  axpy(out.params, lr, lg.grads);  // ascent on the objective
  return out;
}

Optimizer::Optimizer(OptimizerKind kind, double lr, double momentum)
    : kind_(kind), lr_(lr), momentum_(momentum) {
  require(lr > 0.0, "optimizer: lr must be positive");
  require(momentum >= 0.0 && momentum < 1.0,
          "optimizer: momentum must lie in [0, 1)");
}

void Optimizer::step(ParameterSet& params, const ParameterSet& grads) {
  require(params.spec == grads.spec, "optimizer: shape mismatch");
  if (!initialized_) {
    m_ = ParameterSet::zeros(params.spec);
    if (kind_ == OptimizerKind::adam) v_ = ParameterSet::zeros(params.spec);
    initialized_ = true;
  }
  require(m_.spec == params.spec, "optimizer: reused across shapes");

  auto p = params.arrays();
  const auto g = grads.arrays();
  auto m = m_.arrays();
  if (kind_ == OptimizerKind::sgd_momentum) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (std::ptrdiff_t j = 0; j < p[i].size; ++j) {
        m[i].data[j] = momentum_ * m[i].data[j] + g[i].data[j];
        p[i].data[j] -= lr_ * m[i].data[j];
      }
    }
    return;
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++t_;
  const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  auto v = v_.arrays();
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::ptrdiff_t j = 0; j < p[i].size; ++j) {
      const double gj = g[i].data[j];
      m[i].data[j] = kBeta1 * m[i].data[j] + (1.0 - kBeta1) * gj;
      v[i].data[j] = kBeta2 * v[i].data[j] + (1.0 - kBeta2) * gj * gj;
      const double mhat = m[i].data[j] / bias1;
      const double vhat = v[i].data[j] / bias2;
      p[i].data[j] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

TrainResult train_gail(const TrainingConfig& config, const Dataset& train_set,
                       const std::filesystem::path& out_dir,
                       const DataProvenance& provenance,
                       const std::function<void(const StepMetrics&)>&
                           on_metrics) {
  config.validate();
  require(!train_set.samples.empty(), "train_gail: empty training set");
  require(train_set.horizon == config.horizon,
          "train_gail: dataset horizon does not match config");

  std::filesystem::create_directories(out_dir);

  const int T = config.horizon;
  const auto n_samples = static_cast<std::uint64_t>(train_set.samples.size());
  Rng root(config.seed);

  ParameterSet actor = init_params(actor_spec(T), root.child(1).seed());
  ParameterSet critic = init_params(critic_spec(T), root.child(2).seed());
  ParameterSet disc = init_params(discriminator_spec(T), root.child(3).seed());
  ParameterSet critic_target = critic;

  Optimizer opt_actor(config.optimizer, config.actor_lr, config.momentum);
  Optimizer opt_critic(config.optimizer, config.critic_lr, config.momentum);
  Optimizer opt_disc(config.optimizer, config.discriminator_lr, config.momentum);

  write_json_file(out_dir / "manifest.json",
                  {{"model_kind", "gail"},
                   {"config", config_json(config)},
                   {"data", provenance_json(provenance)},
                   {"created", iso_utc_timestamp()},
                   {"version", std::string(kVersion)}});

  std::ofstream metrics(out_dir / "metrics.jsonl",
                        std::ios::trunc | std::ios::binary);
  if (!metrics) {
    throw io_error((out_dir / "metrics.jsonl").string(), "cannot open");
  }

  const auto save_all = [&](int step) {
    const CheckpointMeta base{"", config.seed, step, ""};
    CheckpointMeta meta = base;
    meta.kind = "actor";
    save_checkpoint(out_dir / step_file("actor", step), actor, meta);
    meta.kind = "critic";
    save_checkpoint(out_dir / step_file("critic", step), critic, meta);
    meta.kind = "critic_target";
    save_checkpoint(out_dir / step_file("critic_target", step), critic_target,
                    meta);
    meta.kind = "discriminator";
    save_checkpoint(out_dir / step_file("discriminator", step), disc, meta);
  };
  save_all(0);

  const auto expert_prefix = [&](std::uint64_t sample, int length) {
    const auto& points = train_set.samples[static_cast<std::size_t>(sample)].points;
    return make_state({points.data(), static_cast<std::size_t>(length)}, T);
  };

  std::vector<Transition> replay;
  replay.reserve(static_cast<std::size_t>(
      std::min<long long>(config.replay_capacity, 1 << 20)));
  std::size_t replay_next = 0;
  const auto replay_push = [&](Transition t) {
    if (replay.size() < static_cast<std::size_t>(config.replay_capacity)) {
      replay.push_back(std::move(t));
    } else {
      replay[replay_next] = std::move(t);
      replay_next = (replay_next + 1) % replay.size();
    }
  };

  const auto start = std::chrono::steady_clock::now();

  for (int step = 1; step <= config.total_steps; ++step) {
    Rng step_rng = root.child(16 + static_cast<std::uint64_t>(step));

    // fresh rollouts from expert-derived initial states
    std::vector<State> initials;
    std::vector<Rng> episode_rngs;
    for (int e = 0; e < config.episodes_per_step; ++e) {
      const std::uint64_t idx = step_rng.uniform_index(n_samples);
      const int len = config.prefix_mode == PrefixMode::first_point
                          ? 1
                          : step_rng.uniform_int(1, T - 1);
      initials.push_back(expert_prefix(idx, len));
      episode_rngs.emplace_back(
          step_rng.child(static_cast<std::uint64_t>(e)).seed());
    }
    std::vector<Episode> episodes = run_episodes(
        actor, std::move(initials), config.noise_scale, episode_rngs);

    std::vector<Transition> fresh;
    double displacement_sum = 0.0;
    for (Episode& ep : episodes) {
      for (Transition& t : ep.steps) {
        const Point last = t.s.slot_point(t.s.length() - 1);
        displacement_sum += std::hypot(t.a.point.x - last.x,
                                       t.a.point.y - last.y);
        fresh.push_back(std::move(t));
      }
    }
    const double mean_displacement =
        displacement_sum / static_cast<double>(fresh.size());
    for (Transition& t : fresh) replay_push(t);

    // discriminator: rolled-out successor states vs expert prefixes of the
    // same lengths
    std::vector<State> fakes;
    std::vector<State> reals;
    for (int b = 0; b < config.batch_size; ++b) {
      const auto& t = fresh[static_cast<std::size_t>(
          step_rng.uniform_index(fresh.size()))];
      fakes.push_back(t.s_next);
      reals.push_back(expert_prefix(step_rng.uniform_index(n_samples),
                                    t.s_next.length()));
    }
    LossAndGrads disc_lg = discriminator_bce(disc, reals, fakes);
    ensure_finite(disc_lg, "train_gail: discriminator");
    opt_disc.step(disc, disc_lg.grads);

    // critic: Bellman regression on replayed transitions
    std::vector<Transition> batch;
    for (int b = 0; b < config.batch_size; ++b) {
      batch.push_back(replay[static_cast<std::size_t>(
          step_rng.uniform_index(replay.size()))]);
    }
    const TargetsAndRewards tr =
        targets_and_rewards(disc, critic_target, batch, config.gamma);
    std::vector<State> batch_states;
    batch_states.reserve(batch.size());
    for (const Transition& t : batch) batch_states.push_back(t.s);
    LossAndGrads critic_lg = critic_bellman(critic, batch_states, tr.targets);
    ensure_finite(critic_lg, "train_gail: critic");
    opt_critic.step(critic, critic_lg.grads);
    soft_mix(critic_target, critic, config.tau);

    // actor: ascend mean Q on the same batch of states
    LossAndGrads actor_lg =
        actor_q_objective(actor, critic, disc, batch_states, config.gamma);
    ensure_finite(actor_lg, "train_gail: actor");
    ParameterSet descent = actor_lg.grads;
    for (auto& a : descent.arrays()) {
      for (std::ptrdiff_t j = 0; j < a.size; ++j) a.data[j] = -a.data[j];
    }
    opt_actor.step(actor, descent);

    if (step % config.metrics_interval == 0 || step == config.total_steps) {
      double reward_sum = 0.0;
      for (const double r : tr.rewards) reward_sum += r;
      StepMetrics m;
      m.step = step;
      m.discriminator_loss = disc_lg.value;
      m.critic_loss = critic_lg.value;
      m.actor_objective = actor_lg.value;
      m.mean_reward = reward_sum / static_cast<double>(tr.rewards.size());
      m.mean_displacement = mean_displacement;
      m.wall_seconds = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      const nlohmann::json record = {
          {"step", m.step},
          {"discriminator_loss", m.discriminator_loss},
          {"critic_loss", m.critic_loss},
          {"actor_objective", m.actor_objective},
          {"mean_reward", m.mean_reward},
          {"mean_displacement", m.mean_displacement},
          {"wall_seconds", m.wall_seconds},
      };
      metrics << record.dump() << '\n';
      metrics.flush();
      if (on_metrics) on_metrics(m);
    }
    if (step % config.checkpoint_interval == 0 ||
        step == config.total_steps) {
      save_all(step);
    }
  }

  return {std::move(actor), std::move(critic), std::move(critic_target),
          std::move(disc), config.total_steps};
}

}  // namespace gailpen
