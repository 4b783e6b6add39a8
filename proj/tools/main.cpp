// Command line surface: dataset ingestion, adversarial and supervised
// training, prefix-conditioned generation, curvature evaluation, Q-maps and
// a bundled synthetic-expert smoke run.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gailpen/checkpoint.hpp"
#include "gailpen/dataset.hpp"
#include "gailpen/errors.hpp"
#include "gailpen/evaluation.hpp"
#include "gailpen/manifest.hpp"
#include "gailpen/predictor.hpp"
#include "gailpen/render.hpp"
#include "gailpen/state.hpp"
#include "gailpen/synthetic.hpp"
#include "gailpen/trainer.hpp"
#include "gailpen/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gailpen;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTraining = 3;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

json input_record(const fs::path& path) {
  return {{"path", path.string()},
          {"fingerprint", fingerprint_hex(fingerprint_file(path))}};
}

void log_step(const StepMetrics& m, int total, int every) {
  if (m.step % every != 0 && m.step != total) return;
  std::cerr << "step " << m.step << "/" << total << "  disc "
            << m.discriminator_loss << "  critic " << m.critic_loss
            << "  objective " << m.actor_objective << "  reward "
            << m.mean_reward << "\n";
}

// ---------------------------------------------------------------- ingest --

struct IngestArgs {
  std::string format = "unipen";
  std::string in;
  std::string out;
  int horizon = 50;
  double split = 0.8;
  std::uint64_t seed = 0;
};

int run_ingest(const IngestArgs& a) {
  std::vector<RawSample> raw;
  std::size_t skipped = 0;
  if (a.format == "unipen") {
    std::ifstream in(a.in, std::ios::binary);
    if (!in) throw io_error(a.in, "cannot open");
    ParseResult parsed = parse_unipen_subset(in);
    raw = std::move(parsed.samples);
    skipped = parsed.skipped_segments;
  } else {
    raw = load_canonical(a.in);
  }
  BuildResult built = build_dataset(raw, a.horizon, a.split, a.seed);
  const fs::path out(a.out);
  fs::create_directories(out);
  write_dataset(built.train, out / "train.jsonl");
  write_dataset(built.test, out / "test.jsonl");
  write_json_file(
      out / "manifest.json",
      {{"command", "ingest"},
       {"version", std::string(kVersion)},
       {"created", iso_utc_timestamp()},
       {"config",
        {{"format", a.format},
         {"in", a.in},
         {"out", a.out},
         {"horizon", a.horizon},
         {"split", a.split},
         {"seed", a.seed}}},
       {"inputs", json::array({input_record(a.in)})},
       {"result",
        {{"train_count", built.train.samples.size()},
         {"test_count", built.test.samples.size()},
         {"dropped", built.dropped},
         {"skipped_segments", skipped}}}});
  std::cout << "ingested " << raw.size() << " samples -> "
            << built.train.samples.size() << " train / "
            << built.test.samples.size() << " test (dropped " << built.dropped
            << ", skipped segments " << skipped << ")\n";
  return kExitOk;
}

// ----------------------------------------------------------------- train --

struct TrainArgs {
  std::string data;
  std::string out;
  std::string optimizer = "sgd_momentum";
  std::string prefix_mode = "first_point";
  TrainingConfig config;
};

void add_common_train_flags(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--data", a.data, "Training dataset file")->required();
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--actor-lr", a.config.actor_lr, "Actor learning rate")
      ->capture_default_str();
  cmd->add_option("--batch-size", a.config.batch_size, "Update batch size")
      ->capture_default_str();
  cmd->add_option("--steps", a.config.total_steps, "Number of update steps")
      ->capture_default_str();
  cmd->add_option("--seed", a.config.seed, "Master random seed")
      ->capture_default_str();
  cmd->add_option("--checkpoint-interval", a.config.checkpoint_interval,
                  "Steps between checkpoints")
      ->capture_default_str();
  cmd->add_option("--metrics-interval", a.config.metrics_interval,
                  "Steps between metrics records")
      ->capture_default_str();
  cmd->add_option("--optimizer", a.optimizer, "Optimizer")
      ->check(CLI::IsMember({"sgd_momentum", "sgd", "adam"}))
      ->capture_default_str();
  cmd->add_option("--momentum", a.config.momentum,
                  "Momentum coefficient (sgd_momentum only)")
      ->capture_default_str();
}

void add_gail_train_flags(CLI::App* cmd, TrainArgs& a) {
  cmd->add_option("--gamma", a.config.gamma, "Discount factor")
      ->capture_default_str();
  cmd->add_option("--critic-lr", a.config.critic_lr, "Critic learning rate")
      ->capture_default_str();
  cmd->add_option("--disc-lr", a.config.discriminator_lr,
                  "Discriminator learning rate")
      ->capture_default_str();
  cmd->add_option("--noise", a.config.noise_scale,
                  "Gaussian action noise scale in training rollouts")
      ->capture_default_str();
  cmd->add_option("--tau", a.config.tau, "Target network mixing rate")
      ->capture_default_str();
  cmd->add_option("--episodes-per-step", a.config.episodes_per_step,
                  "Rollout episodes per update step")
      ->capture_default_str();
  cmd->add_option("--replay-capacity", a.config.replay_capacity,
                  "Transition replay buffer capacity")
      ->capture_default_str();
  cmd->add_option("--prefix-mode", a.prefix_mode,
                  "Initial state of training rollouts")
      ->check(CLI::IsMember({"first_point", "random_prefix"}))
      ->capture_default_str();
  cmd->add_option("--workers", a.config.workers,
                  "Worker threads (1 = fully serial)")
      ->capture_default_str();
}

TrainingConfig resolve_train_config(const TrainArgs& a, int horizon) {
  TrainingConfig config = a.config;
  config.horizon = horizon;
  config.optimizer = optimizer_from_name(a.optimizer);
  config.prefix_mode = prefix_mode_from_name(a.prefix_mode);
  return config;
}

int run_train_gail(const TrainArgs& a) {
  const Dataset train = load_dataset(a.data);
  const TrainingConfig config = resolve_train_config(a, train.horizon);
  const DataProvenance provenance{a.data, fingerprint_file(a.data)};
  const int every = std::max(1, config.total_steps / 20);
  const auto start = std::chrono::steady_clock::now();
  const TrainResult result =
      train_gail(config, train, a.out, provenance, [&](const StepMetrics& m) {
        log_step(m, config.total_steps, every);
      });
  std::cout << "trained " << result.steps_completed << " steps in "
            << seconds_since(start) << " s; artifacts in " << a.out << "\n";
  return kExitOk;
}

int run_train_baseline(const TrainArgs& a) {
  const Dataset train = load_dataset(a.data);
  const TrainingConfig config = resolve_train_config(a, train.horizon);
  const DataProvenance provenance{a.data, fingerprint_file(a.data)};
  const int every = std::max(1, config.total_steps / 20);
  const auto start = std::chrono::steady_clock::now();
  const PredictorResult result = train_predictor(
      config, train, a.out, provenance, [&](const PredictorMetrics& m) {
        if (m.step % every == 0 || m.step == config.total_steps) {
          std::cerr << "step " << m.step << "/" << config.total_steps
                    << "  loss " << m.loss << "\n";
        }
      });
  std::cout << "trained " << result.losses.size() << " steps in "
            << seconds_since(start) << " s; artifacts in " << a.out << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- generate --

struct GenerateArgs {
  std::string model;
  std::string data;
  std::string out;
  int t0 = 20;
  int count = 0;  // 0 = every trajectory in the set
  int render_count = 0;
};

int run_generate(const GenerateArgs& a) {
  const Checkpoint model = load_checkpoint(a.model);
  const Dataset source = load_dataset(a.data);
  const auto total = static_cast<int>(source.samples.size());
  const int n = a.count > 0 ? std::min(a.count, total) : total;

  Dataset generated;
  generated.horizon = source.horizon;
  generated.split = Split::test;
  generated.seed = source.seed;
  generated.samples.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    generated.samples.push_back(generate_from_prefix(
        model.params, source.samples[static_cast<std::size_t>(i)], a.t0));
  }

  const fs::path out(a.out);
  fs::create_directories(out);
  write_dataset(generated, out / "generated.jsonl");

  const int rendered = std::min(a.render_count, n);
  for (int i = 0; i < rendered; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "gen_%04d.ppm", i);
    write_ppm(render_trajectory(generated.samples[static_cast<std::size_t>(i)]
                                    .points),
              out / name);
    std::snprintf(name, sizeof(name), "src_%04d.ppm", i);
    write_ppm(
        render_trajectory(source.samples[static_cast<std::size_t>(i)].points),
        out / name);
  }

  write_json_file(out / "manifest.json",
                  {{"command", "generate"},
                   {"version", std::string(kVersion)},
                   {"created", iso_utc_timestamp()},
                   {"config",
                    {{"model", a.model},
                     {"data", a.data},
                     {"out", a.out},
                     {"t0", a.t0},
                     {"count", n},
                     {"render", rendered},
                     {"model_kind", model.meta.kind},
                     {"model_step", model.meta.step}}},
                   {"inputs", json::array({input_record(a.model),
                                           input_record(a.data)})}});
  std::cout << "generated " << n << " trajectories (prefix " << a.t0
            << ") with the " << model.meta.kind << " checkpoint\n";
  return kExitOk;
}

// -------------------------------------------------------- eval-curvature --

struct EvalArgs {
  std::string expert;
  std::string gail;
  std::string baseline;
  std::string out;
  int t_lo = 21;  // 1-based, inclusive
  int t_hi = 50;
  int delta_max = 20;
  int bins = 50;
  double kappa_max = 30.0;
};

int run_eval_curvature(const EvalArgs& a) {
  const fs::path out(a.out);
  fs::create_directories(out);

  // flags are 1-based inclusive; internally the window is 0-based half-open
  const auto histogram_of = [&](const Dataset& set) {
    return curvature_histogram(set.samples, a.t_lo - 1, a.t_hi, a.delta_max,
                               a.bins, a.kappa_max);
  };
  const auto export_histogram = [&](const CurvatureHistogram& hist,
                                    const std::string& stem) {
    write_histogram(hist, out / (stem + ".tsv"));
    write_ppm(render_histogram(hist), out / (stem + ".ppm"));
  };

  const Dataset expert = load_dataset(a.expert);
  const CurvatureHistogram expert_hist = histogram_of(expert);
  export_histogram(expert_hist, "hist_expert");

  json inputs = json::array({input_record(a.expert)});
  json distances;
  CurvatureHistogram gail_hist;
  if (!a.gail.empty()) {
    gail_hist = histogram_of(load_dataset(a.gail));
    export_histogram(gail_hist, "hist_gail");
    distances["expert_vs_gail"] = histogram_distance(expert_hist, gail_hist);
    inputs.push_back(input_record(a.gail));
  }
  if (!a.baseline.empty()) {
    const CurvatureHistogram baseline_hist = histogram_of(load_dataset(a.baseline));
    export_histogram(baseline_hist, "hist_baseline");
    distances["expert_vs_baseline"] =
        histogram_distance(expert_hist, baseline_hist);
    if (!a.gail.empty()) {
      distances["gail_vs_baseline"] =
          histogram_distance(gail_hist, baseline_hist);
    }
    inputs.push_back(input_record(a.baseline));
  }
  write_json_file(out / "distances.json", distances);

  write_json_file(out / "manifest.json",
                  {{"command", "eval-curvature"},
                   {"version", std::string(kVersion)},
                   {"created", iso_utc_timestamp()},
                   {"config",
                    {{"expert", a.expert},
                     {"gail", a.gail},
                     {"baseline", a.baseline},
                     {"out", a.out},
                     {"t_lo", a.t_lo},
                     {"t_hi", a.t_hi},
                     {"delta_max", a.delta_max},
                     {"bins", a.bins},
                     {"kappa_max", a.kappa_max}}},
                   {"inputs", inputs}});

  for (const auto& [key, value] : distances.items()) {
    std::cout << key << " " << value.get<double>() << "\n";
  }
  if (distances.empty()) {
    std::cout << "expert histogram written; nothing to compare\n";
  }
  return kExitOk;
}

// ------------------------------------------------------------------ qmap --

struct QmapArgs {
  std::string critic;
  std::string disc;
  std::string data;
  std::string out;
  int index = 0;
  int t0 = 20;
  int grid = 64;
  double gamma = 0.9;
  int workers = 1;
};

int run_qmap(const QmapArgs& a) {
  const Checkpoint critic = load_checkpoint(a.critic);
  const Checkpoint disc = load_checkpoint(a.disc);
  const Dataset data = load_dataset(a.data);
  if (a.index < 0 ||
      a.index >= static_cast<int>(data.samples.size())) {
    throw std::invalid_argument("--index out of range for the dataset");
  }
  if (a.t0 < 1 || a.t0 >= data.horizon) {
    throw std::invalid_argument("--t0 must lie in [1, horizon)");
  }
  const Trajectory& traj = data.samples[static_cast<std::size_t>(a.index)];
  const State state = make_state(
      std::span(traj.points.data(), static_cast<std::size_t>(a.t0)),
      data.horizon);

  const QMap map =
      qmap(critic.params, disc.params, state, a.grid, a.gamma, a.workers);

  const fs::path out(a.out);
  fs::create_directories(out);
  write_qmap(map, out / "qmap.tsv");
  write_ppm(render_qmap(map), out / "qmap.ppm");

  write_json_file(out / "manifest.json",
                  {{"command", "qmap"},
                   {"version", std::string(kVersion)},
                   {"created", iso_utc_timestamp()},
                   {"config",
                    {{"critic", a.critic},
                     {"disc", a.disc},
                     {"data", a.data},
                     {"out", a.out},
                     {"index", a.index},
                     {"t0", a.t0},
                     {"grid", a.grid},
                     {"gamma", a.gamma},
                     {"workers", a.workers}}},
                   {"inputs",
                    json::array({input_record(a.critic), input_record(a.disc),
                                 input_record(a.data)})}});
  std::cout << "qmap " << a.grid << "x" << a.grid << " for trajectory "
            << a.index << " prefix " << a.t0 << " -> " << a.out << "\n";
  return kExitOk;
}

// ------------------------------------------------------------ smoke-test --

struct SmokeArgs {
  std::string out;
  std::uint64_t seed = 0;
  int experts = 500;
  int horizon = 50;
  int t0 = 20;
  int steps = 20000;
  int baseline_steps = 3000;
  int checkpoint_interval = 0;  // 0 = a quarter of the step budget
  int batch_size = 32;
  // low rollout noise matters here: the experts are smooth, and exploration
  // jitter at the scale of a whole pen step drowns the curvature signal
  double noise = 0.01;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double disc_lr = 1e-3;
  double baseline_lr = 1e-3;
  double gamma = 0.9;
  double tau = 0.01;
  int episodes_per_step = 2;
  std::string optimizer = "adam";
  int workers = 1;
  int delta_max = 20;
  int bins = 50;
  double kappa_max = 30.0;
};

int run_smoke(const SmokeArgs& a) {
  const auto t_start = std::chrono::steady_clock::now();
  const fs::path out(a.out);
  fs::create_directories(out);
  json phases;

  // 1. synthetic experts -> train/test datasets
  std::cerr << "[smoke] synthesizing " << a.experts << " expert samples\n";
  SyntheticConfig syn;
  syn.count = a.experts;
  syn.seed = a.seed;
  const std::vector<RawSample> raw = synthesize_experts(syn);
  const BuildResult built = build_dataset(raw, a.horizon, 0.8, a.seed);
  fs::create_directories(out / "data");
  write_dataset(built.train, out / "data" / "train.jsonl");
  write_dataset(built.test, out / "data" / "test.jsonl");
  phases["synthesize_seconds"] = seconds_since(t_start);

  // 2. adversarial training
  TrainingConfig config;
  config.horizon = a.horizon;
  config.seed = a.seed;
  config.total_steps = a.steps;
  config.batch_size = a.batch_size;
  config.noise_scale = a.noise;
  config.actor_lr = a.actor_lr;
  config.critic_lr = a.critic_lr;
  config.discriminator_lr = a.disc_lr;
  config.gamma = a.gamma;
  config.tau = a.tau;
  config.episodes_per_step = a.episodes_per_step;
  config.optimizer = optimizer_from_name(a.optimizer);
  config.prefix_mode = PrefixMode::random_prefix;
  config.checkpoint_interval =
      a.checkpoint_interval > 0 ? a.checkpoint_interval
                                : std::max(1, a.steps / 4);
  config.workers = a.workers;

  std::cerr << "[smoke] training gail for " << a.steps << " steps\n";
  auto t_phase = std::chrono::steady_clock::now();
  const DataProvenance provenance{
      (out / "data" / "train.jsonl").string(),
      fingerprint_file(out / "data" / "train.jsonl")};
  const int every = std::max(1, a.steps / 20);
  const TrainResult trained =
      train_gail(config, built.train, out / "gail", provenance,
                 [&](const StepMetrics& m) { log_step(m, a.steps, every); });
  phases["gail_seconds"] = seconds_since(t_phase);

  // 3. supervised baseline
  std::cerr << "[smoke] training baseline for " << a.baseline_steps
            << " steps\n";
  t_phase = std::chrono::steady_clock::now();
  TrainingConfig baseline_config = config;
  baseline_config.total_steps = a.baseline_steps;
  baseline_config.actor_lr = a.baseline_lr;
  baseline_config.checkpoint_interval =
      a.checkpoint_interval > 0 ? a.checkpoint_interval
                                : std::max(1, a.baseline_steps / 4);
  const PredictorResult baseline = train_predictor(
      baseline_config, built.train, out / "baseline", provenance);
  phases["baseline_seconds"] = seconds_since(t_phase);

  // 4. prefix-conditioned generation over the test set, three ways
  std::cerr << "[smoke] generating from " << built.test.samples.size()
            << " test prefixes (t0 " << a.t0 << ")\n";
  t_phase = std::chrono::steady_clock::now();
  char untrained_name[48];
  std::snprintf(untrained_name, sizeof(untrained_name), "actor_%06d.ckpt", 0);
  const Checkpoint untrained =
      load_checkpoint(out / "gail" / untrained_name);

  const auto generate_set = [&](const ParameterSet& params) {
    Dataset gen;
    gen.horizon = a.horizon;
    gen.split = Split::test;
    gen.seed = a.seed;
    gen.samples.reserve(built.test.samples.size());
    for (const Trajectory& source : built.test.samples) {
      gen.samples.push_back(generate_from_prefix(params, source, a.t0));
    }
    return gen;
  };
  const Dataset gen_gail = generate_set(trained.actor);
  const Dataset gen_untrained = generate_set(untrained.params);
  const Dataset gen_baseline = generate_set(baseline.params);
  fs::create_directories(out / "gen");
  write_dataset(gen_gail, out / "gen" / "gen_gail.jsonl");
  write_dataset(gen_untrained, out / "gen" / "gen_untrained.jsonl");
  write_dataset(gen_baseline, out / "gen" / "gen_baseline.jsonl");
  phases["generate_seconds"] = seconds_since(t_phase);

  // 5. curvature histograms over the generated window
  t_phase = std::chrono::steady_clock::now();
  const auto histogram_of = [&](const Dataset& set) {
    return curvature_histogram(set.samples, a.t0, a.horizon, a.delta_max,
                               a.bins, a.kappa_max);
  };
  const CurvatureHistogram hist_expert = histogram_of(built.test);
  const CurvatureHistogram hist_gail = histogram_of(gen_gail);
  const CurvatureHistogram hist_untrained = histogram_of(gen_untrained);
  const CurvatureHistogram hist_baseline = histogram_of(gen_baseline);
  fs::create_directories(out / "eval");
  const auto export_histogram = [&](const CurvatureHistogram& hist,
                                    const std::string& stem) {
    write_histogram(hist, out / "eval" / (stem + ".tsv"));
    write_ppm(render_histogram(hist), out / "eval" / (stem + ".ppm"));
  };
  export_histogram(hist_expert, "hist_expert");
  export_histogram(hist_gail, "hist_gail");
  export_histogram(hist_untrained, "hist_untrained");
  export_histogram(hist_baseline, "hist_baseline");

  const double dist_gail = histogram_distance(hist_gail, hist_expert);
  const double dist_untrained =
      histogram_distance(hist_untrained, hist_expert);
  const double dist_baseline = histogram_distance(hist_baseline, hist_expert);
  write_json_file(out / "eval" / "distances.json",
                  {{"expert_vs_gail", dist_gail},
                   {"expert_vs_untrained", dist_untrained},
                   {"expert_vs_baseline", dist_baseline}});

  // 6. a Q-map conditioned on the first test prefix
  const Trajectory& probe = built.test.samples.front();
  const State probe_state = make_state(
      std::span(probe.points.data(), static_cast<std::size_t>(a.t0)),
      a.horizon);
  const QMap map = qmap(trained.critic, trained.discriminator, probe_state,
                        64, config.gamma, a.workers);
  write_qmap(map, out / "eval" / "qmap.tsv");
  write_ppm(render_qmap(map), out / "eval" / "qmap.ppm");

  // 7. a few rendered trajectories
  fs::create_directories(out / "render");
  for (int i = 0; i < std::min<int>(4, static_cast<int>(
                                           built.test.samples.size()));
       ++i) {
    char name[32];
    const auto idx = static_cast<std::size_t>(i);
    std::snprintf(name, sizeof(name), "expert_%02d.ppm", i);
    write_ppm(render_trajectory(built.test.samples[idx].points),
              out / "render" / name);
    std::snprintf(name, sizeof(name), "gail_%02d.ppm", i);
    write_ppm(render_trajectory(gen_gail.samples[idx].points),
              out / "render" / name);
    std::snprintf(name, sizeof(name), "baseline_%02d.ppm", i);
    write_ppm(render_trajectory(gen_baseline.samples[idx].points),
              out / "render" / name);
  }
  phases["evaluate_seconds"] = seconds_since(t_phase);

  // verdict: the trained actor must beat the untrained one by 30% on the
  // histogram distance, and the delta=10 generated row must peak in the
  // lowest-curvature bin
  const double improvement =
      dist_untrained > 0.0 ? 1.0 - dist_gail / dist_untrained : 0.0;
  const bool improvement_ok = improvement >= 0.3;
  const int mode_delta = std::min(10, a.delta_max);
  Eigen::Index mode_bin = -1;
  hist_gail.matrix.row(mode_delta - 1).maxCoeff(&mode_bin);
  const bool mode_ok = mode_bin == 0;
  const bool passed = improvement_ok && mode_ok;

  char final_actor[48], final_critic[48], final_disc[48], final_pred[48];
  std::snprintf(final_actor, sizeof(final_actor), "actor_%06d.ckpt", a.steps);
  std::snprintf(final_critic, sizeof(final_critic), "critic_%06d.ckpt",
                a.steps);
  std::snprintf(final_disc, sizeof(final_disc), "discriminator_%06d.ckpt",
                a.steps);
  std::snprintf(final_pred, sizeof(final_pred), "predictor_%06d.ckpt",
                a.baseline_steps);
  const json summary = {
      {"passed", passed},
      {"improvement", improvement},
      {"improvement_threshold", 0.3},
      {"improvement_ok", improvement_ok},
      {"mode_delta", mode_delta},
      {"mode_bin", static_cast<int>(mode_bin)},
      {"mode_ok", mode_ok},
      {"distances",
       {{"gail", dist_gail},
        {"untrained", dist_untrained},
        {"baseline", dist_baseline}}},
      {"phases", phases},
      {"total_seconds", seconds_since(t_start)},
      {"artifacts",
       {{"train_data", "data/train.jsonl"},
        {"test_data", "data/test.jsonl"},
        {"gail_dir", "gail"},
        {"baseline_dir", "baseline"},
        {"gen_gail", "gen/gen_gail.jsonl"},
        {"gen_untrained", "gen/gen_untrained.jsonl"},
        {"gen_baseline", "gen/gen_baseline.jsonl"},
        {"qmap", "eval/qmap.tsv"},
        {"actor_ckpt", std::string("gail/") + final_actor},
        {"critic_ckpt", std::string("gail/") + final_critic},
        {"disc_ckpt", std::string("gail/") + final_disc},
        {"untrained_ckpt", std::string("gail/") + untrained_name},
        {"predictor_ckpt", std::string("baseline/") + final_pred}}}};
  write_json_file(out / "summary.json", summary);

  write_json_file(out / "manifest.json",
                  {{"command", "smoke-test"},
                   {"version", std::string(kVersion)},
                   {"created", iso_utc_timestamp()},
                   {"config",
                    {{"out", a.out},
                     {"seed", a.seed},
                     {"experts", a.experts},
                     {"horizon", a.horizon},
                     {"t0", a.t0},
                     {"steps", a.steps},
                     {"baseline_steps", a.baseline_steps},
                     {"checkpoint_interval", config.checkpoint_interval},
                     {"batch_size", a.batch_size},
                     {"noise", a.noise},
                     {"actor_lr", a.actor_lr},
                     {"critic_lr", a.critic_lr},
                     {"disc_lr", a.disc_lr},
                     {"baseline_lr", a.baseline_lr},
                     {"gamma", a.gamma},
                     {"tau", a.tau},
                     {"episodes_per_step", a.episodes_per_step},
                     {"optimizer", a.optimizer},
                     {"workers", a.workers},
                     {"delta_max", a.delta_max},
                     {"bins", a.bins},
                     {"kappa_max", a.kappa_max}}}});

  std::cout << "distance gail " << dist_gail << "  untrained "
            << dist_untrained << "  baseline " << dist_baseline << "\n";
  std::cout << "improvement " << improvement << " (threshold 0.3) "
            << (improvement_ok ? "ok" : "FAILED") << "\n";
  std::cout << "delta=" << mode_delta << " mode bin " << mode_bin
            << (mode_ok ? " ok" : " FAILED") << "\n";
  std::cout << (passed ? "smoke-test PASS" : "smoke-test FAIL") << "\n";
  return passed ? kExitOk : kExitTraining;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pen-trajectory imitation: ingest handwriting data, train the "
      "adversarial model or the prediction baseline, generate from prefixes "
      "and evaluate curvature statistics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "Read option defaults from an INI file");

  int rc = kExitOk;

  IngestArgs ingest_args;
  CLI::App* ingest =
      app.add_subcommand("ingest", "Convert raw handwriting data to datasets");
  ingest->add_option("--format", ingest_args.format, "Input format")
      ->check(CLI::IsMember({"unipen", "canonical"}))
      ->capture_default_str();
  ingest->add_option("--in", ingest_args.in, "Input file")->required();
  ingest->add_option("--out", ingest_args.out, "Output directory")->required();
  ingest->add_option("--horizon", ingest_args.horizon, "Points per trajectory")
      ->capture_default_str();
  ingest->add_option("--split", ingest_args.split, "Training fraction")
      ->capture_default_str();
  ingest->add_option("--seed", ingest_args.seed, "Shuffle seed")
      ->capture_default_str();
  ingest->callback([&] { rc = run_ingest(ingest_args); });

  TrainArgs gail_args;
  CLI::App* train_gail_cmd =
      app.add_subcommand("train-gail", "Adversarial imitation training");
  add_common_train_flags(train_gail_cmd, gail_args);
  add_gail_train_flags(train_gail_cmd, gail_args);
  train_gail_cmd->callback([&] { rc = run_train_gail(gail_args); });

  TrainArgs baseline_args;
  CLI::App* train_baseline_cmd = app.add_subcommand(
      "train-baseline", "Supervised next-point prediction baseline");
  add_common_train_flags(train_baseline_cmd, baseline_args);
  train_baseline_cmd->callback([&] { rc = run_train_baseline(baseline_args); });

  GenerateArgs generate_args;
  CLI::App* generate =
      app.add_subcommand("generate", "Prefix-conditioned generation");
  generate->add_option("--model", generate_args.model,
                       "Actor or predictor checkpoint")
      ->required();
  generate->add_option("--data", generate_args.data, "Source dataset file")
      ->required();
  generate->add_option("--out", generate_args.out, "Output directory")
      ->required();
  generate->add_option("--t0", generate_args.t0, "Prefix length")
      ->capture_default_str();
  generate->add_option("--count", generate_args.count,
                       "Trajectories to generate (0 = all)")
      ->capture_default_str();
  generate->add_option("--render", generate_args.render_count,
                       "Render the first N pairs as images")
      ->capture_default_str();
  generate->callback([&] { rc = run_generate(generate_args); });

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval-curvature", "Multi-scale curvature histograms and distances");
  eval_cmd->add_option("--expert", eval_args.expert, "Expert dataset file")
      ->required();
  eval_cmd->add_option("--gail", eval_args.gail, "Generated dataset file");
  eval_cmd->add_option("--baseline", eval_args.baseline,
                       "Baseline-generated dataset file");
  eval_cmd->add_option("--out", eval_args.out, "Output directory")->required();
  eval_cmd
      ->add_option("--t-lo", eval_args.t_lo,
                   "First probed position, 1-based inclusive")
      ->capture_default_str();
  eval_cmd
      ->add_option("--t-hi", eval_args.t_hi,
                   "Last probed position, 1-based inclusive")
      ->capture_default_str();
  eval_cmd->add_option("--delta-max", eval_args.delta_max, "Largest scale")
      ->capture_default_str();
  eval_cmd->add_option("--bins", eval_args.bins, "Curvature bins")
      ->capture_default_str();
  eval_cmd->add_option("--kappa-max", eval_args.kappa_max,
                       "Top edge of the curvature range")
      ->capture_default_str();
  eval_cmd->callback([&] { rc = run_eval_curvature(eval_args); });

  QmapArgs qmap_args;
  CLI::App* qmap_cmd = app.add_subcommand(
      "qmap", "Q over every candidate next position for one state");
  qmap_cmd->add_option("--critic", qmap_args.critic, "Critic checkpoint")
      ->required();
  qmap_cmd->add_option("--disc", qmap_args.disc, "Discriminator checkpoint")
      ->required();
  qmap_cmd->add_option("--data", qmap_args.data, "Dataset file")->required();
  qmap_cmd->add_option("--out", qmap_args.out, "Output directory")->required();
  qmap_cmd->add_option("--index", qmap_args.index, "Trajectory index")
      ->capture_default_str();
  qmap_cmd->add_option("--t0", qmap_args.t0, "Prefix length")
      ->capture_default_str();
  qmap_cmd->add_option("--grid", qmap_args.grid, "Grid resolution")
      ->capture_default_str();
  qmap_cmd->add_option("--gamma", qmap_args.gamma, "Discount factor")
      ->capture_default_str();
  qmap_cmd->add_option("--workers", qmap_args.workers, "Worker threads")
      ->capture_default_str();
  qmap_cmd->callback([&] { rc = run_qmap(qmap_args); });

  SmokeArgs smoke_args;
  CLI::App* smoke = app.add_subcommand(
      "smoke-test", "End-to-end synthetic-expert run with a pass/fail verdict");
  smoke->add_option("--out", smoke_args.out, "Output directory")->required();
  smoke->add_option("--seed", smoke_args.seed, "Master seed")
      ->capture_default_str();
  smoke->add_option("--experts", smoke_args.experts, "Synthetic expert count")
      ->capture_default_str();
  smoke->add_option("--horizon", smoke_args.horizon, "Points per trajectory")
      ->capture_default_str();
  smoke->add_option("--t0", smoke_args.t0, "Generation prefix length")
      ->capture_default_str();
  smoke->add_option("--steps", smoke_args.steps, "Adversarial update steps")
      ->capture_default_str();
  smoke->add_option("--baseline-steps", smoke_args.baseline_steps,
                    "Baseline update steps")
      ->capture_default_str();
  smoke
      ->add_option("--checkpoint-interval", smoke_args.checkpoint_interval,
                   "Steps between checkpoints (0 = quarter of the budget)")
      ->capture_default_str();
  smoke->add_option("--batch-size", smoke_args.batch_size, "Update batch size")
      ->capture_default_str();
  smoke->add_option("--noise", smoke_args.noise, "Rollout noise scale")
      ->capture_default_str();
  smoke->add_option("--actor-lr", smoke_args.actor_lr, "Actor learning rate")
      ->capture_default_str();
  smoke->add_option("--critic-lr", smoke_args.critic_lr,
                    "Critic learning rate")
      ->capture_default_str();
  smoke->add_option("--disc-lr", smoke_args.disc_lr,
                    "Discriminator learning rate")
      ->capture_default_str();
  smoke->add_option("--baseline-lr", smoke_args.baseline_lr,
                    "Baseline learning rate")
      ->capture_default_str();
  smoke->add_option("--gamma", smoke_args.gamma, "Discount factor")
      ->capture_default_str();
  smoke->add_option("--tau", smoke_args.tau, "Target network mixing rate")
      ->capture_default_str();
  smoke->add_option("--episodes-per-step", smoke_args.episodes_per_step,
                    "Rollout episodes per update step")
      ->capture_default_str();
  smoke->add_option("--optimizer", smoke_args.optimizer, "Optimizer")
      ->check(CLI::IsMember({"sgd_momentum", "sgd", "adam"}))
      ->capture_default_str();
  smoke->add_option("--workers", smoke_args.workers, "Worker threads")
      ->capture_default_str();
  smoke->add_option("--delta-max", smoke_args.delta_max, "Largest scale")
      ->capture_default_str();
  smoke->add_option("--bins", smoke_args.bins, "Curvature bins")
      ->capture_default_str();
  smoke->add_option("--kappa-max", smoke_args.kappa_max,
                    "Top edge of the curvature range")
      ->capture_default_str();
  smoke->callback([&] { rc = run_smoke(smoke_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const parse_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitData;
  } catch (const train_error& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kExitTraining;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return rc;
}
