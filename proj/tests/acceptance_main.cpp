// Acceptance gate: eleven end-to-end criteria, one PASS/FAIL line each.
// Usage: acceptance <cli-binary> <scratch-dir> [criteria...]
// Naming a subset of criterion numbers runs only those; the default is all.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gailpen/checkpoint.hpp"
#include "gailpen/dataset.hpp"
#include "gailpen/errors.hpp"
#include "gailpen/evaluation.hpp"
#include "gailpen/network.hpp"
#include "gailpen/predictor.hpp"
#include "gailpen/rng.hpp"
#include "gailpen/state.hpp"
#include "gailpen/synthetic.hpp"
#include "gailpen/trainer.hpp"
#include "gradcheck.hpp"
#include "naive_net.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gailpen;

namespace {

// Budget of the synthetic smoke experiment (criteria 8-10). The reference
// budget is 20000 steps; this scaled-down schedule reaches the same verdict
// on a single core in a few minutes.
constexpr int kSmokeSteps = 2500;
constexpr int kSmokeBaselineSteps = 1000;
constexpr int kSmokeExperts = 500;
constexpr std::uint64_t kSmokeSeed = 7;

// Reproducibility runs (criterion 11) only need a budget large enough to
// exercise every moving part, not convergence.
constexpr int kReproSteps = 40;
constexpr int kReproBaselineSteps = 20;
constexpr int kReproExperts = 60;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string g_cli;
fs::path g_scratch;

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      g_cli + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  if (raw == -1) return -1;
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

State random_state(Rng& rng, int horizon, int length) {
  std::vector<Point> prefix;
  prefix.reserve(static_cast<std::size_t>(length));
  for (int i = 0; i < length; ++i) {
    prefix.push_back({rng.uniform(), rng.uniform()});
  }
  return make_state(prefix, horizon);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------------------
// 1. env_step against a naive append-to-list reference, exact equality.
Outcome criterion_env_oracle() {
  Rng rng(101);
  int checked = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int horizon = rng.uniform_int(2, 60);
    const int length = rng.uniform_int(1, horizon - 1);
    std::vector<Point> naive;
    for (int i = 0; i < length; ++i) naive.push_back({rng.uniform(), rng.uniform()});
    const State state = make_state(naive, horizon);
    const Action action{{rng.uniform(), rng.uniform()}};

    const State stepped = env_step(state, action);
    naive.push_back(action.point);

    if (stepped.horizon() != horizon) return {false, "horizon mismatch"};
    if (stepped.length() != static_cast<int>(naive.size())) {
      return {false, "length mismatch"};
    }
    for (int i = 0; i < horizon; ++i) {
      const Point expect =
          i < static_cast<int>(naive.size()) ? naive[static_cast<std::size_t>(i)]
                                             : Point{0.0, 0.0};
      const Point got = stepped.slot_point(i);
      if (got.x != expect.x || got.y != expect.y) {
        return {false, "slot mismatch at " + std::to_string(i)};
      }
      if (stepped.slot_valid(i) != (i < static_cast<int>(naive.size()))) {
        return {false, "validity mismatch at " + std::to_string(i)};
      }
    }
    ++checked;
  }
  return {true, std::to_string(checked) + " pairs exact"};
}

// ---------------------------------------------------------------------------
// 2. curvature against 4K/(abc) plus the exact-zero collinear rule.
Outcome criterion_curvature_oracle() {
  Rng rng(202);
  int compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Trajectory traj;
    for (int i = 0; i < 3; ++i) traj.points.push_back({rng.uniform(), rng.uniform()});
    const Point& p = traj.points[0];
    const Point& q = traj.points[1];
    const Point& r = traj.points[2];
    const double cross =
        (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    const double got = curvature_at(traj, 1, 1);
    if (std::abs(cross) < 1e-12) {
      if (got != 0.0) return {false, "near-collinear triple not zero"};
      continue;
    }
    const double a = std::hypot(q.x - p.x, q.y - p.y);
    const double b = std::hypot(r.x - q.x, r.y - q.y);
    const double c = std::hypot(r.x - p.x, r.y - p.y);
    const double area = std::abs(cross) / 2.0;
    const double oracle = 4.0 * area / (a * b * c);
    if (std::abs(got - oracle) > 1e-9 * std::max(1.0, std::abs(oracle))) {
      return {false, "relative error above 1e-9"};
    }
    ++compared;
  }
  for (int trial = 0; trial < 100; ++trial) {
    const Point p0{rng.uniform(), rng.uniform()};
    const Point p1{rng.uniform(), rng.uniform()};
    const double lambda = rng.uniform();
    Trajectory traj;
    traj.points = {p0,
                   {p0.x + lambda * (p1.x - p0.x), p0.y + lambda * (p1.y - p0.y)},
                   p1};
    if (curvature_at(traj, 1, 1) != 0.0) {
      return {false, "collinear triple returned nonzero"};
    }
  }
  return {true, std::to_string(compared) + " triples + 100 collinear"};
}

// ---------------------------------------------------------------------------
// 3. batched GEMM forward against the nested-loop reference.
Outcome criterion_forward_oracle() {
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int T = rng.uniform_int(3, 30);
    const int length = rng.uniform_int(1, T);
    const State state = random_state(rng, T, length);

    const ParameterSet actor = init_params(actor_spec(T), rng.next_u64());
    const Action a = actor_forward(actor, state);
    const auto na = naive::forward(actor, state);
    worst = std::max({worst, std::abs(a.point.x - na[0]),
                      std::abs(a.point.y - na[1])});

    const ParameterSet critic = init_params(critic_spec(T), rng.next_u64());
    worst = std::max(worst, std::abs(critic_forward(critic, state) -
                                     naive::forward(critic, state)[0]));

    const ParameterSet disc =
        init_params(discriminator_spec(T), rng.next_u64());
    worst = std::max(worst, std::abs(discriminator_forward(disc, state) -
                                     naive::forward(disc, state)[0]));
  }
  std::ostringstream detail;
  detail << "20 pairs per head, worst |diff| " << worst;
  return {worst <= 1e-6, detail.str()};
}

// ---------------------------------------------------------------------------
// 4. central finite differences against analytic gradients for the three
//    (network, loss) pairs the trainer uses.
Outcome criterion_gradcheck() {
  constexpr int kT = 12;
  constexpr int kBatch = 6;
  constexpr int kCoords = 200;
  constexpr double kStep = 1e-4;
  constexpr double kRelTol = 1e-3;
  Rng rng(404);

  std::vector<State> states;
  std::vector<State> fakes;
  for (int i = 0; i < kBatch; ++i) {
    states.push_back(random_state(rng, kT, rng.uniform_int(1, kT)));
    fakes.push_back(random_state(rng, kT, rng.uniform_int(1, kT)));
  }
  std::vector<double> targets;
  for (int i = 0; i < kBatch; ++i) targets.push_back(rng.uniform(-1.0, 1.0));

  const ParameterSet disc =
      init_params(discriminator_spec(kT), rng.next_u64());
  const ParameterSet critic = init_params(critic_spec(kT), rng.next_u64());
  const ParameterSet actor = init_params(actor_spec(kT), rng.next_u64());
  const double gamma = 0.9;

  struct Case {
    const char* name;
    const ParameterSet* at;
    std::function<double(const ParameterSet&)> loss;
    ParameterSet analytic;
  };
  std::vector<Case> cases;
  cases.push_back({"discriminator/bce", &disc,
                   [&](const ParameterSet& p) {
                     return discriminator_bce(p, states, fakes).value;
                   },
                   discriminator_bce(disc, states, fakes).grads});
  cases.push_back({"critic/bellman", &critic,
                   [&](const ParameterSet& p) {
                     return critic_bellman(p, states, targets).value;
                   },
                   critic_bellman(critic, states, targets).grads});
  {
    LossAndGrads obj = actor_q_objective(actor, critic, disc, states, gamma);
    ParameterSet neg = obj.grads;
    for (auto& arr : neg.arrays()) {
      for (std::ptrdiff_t i = 0; i < arr.size; ++i) arr.data[i] = -arr.data[i];
    }
    cases.push_back({"actor/negated-q", &actor,
                     [&, gamma](const ParameterSet& p) {
                       return -actor_q_objective(p, critic, disc, states, gamma)
                                   .value;
                     },
                     std::move(neg)});
  }

  std::ostringstream detail;
  bool ok = true;
  for (auto& c : cases) {
    Rng coord_rng(rng.next_u64());
    const testutil::GradCheck check = testutil::fd_param_check(
        *c.at, c.analytic, c.loss, coord_rng, kCoords, kStep, kRelTol);
    detail << c.name << " " << check.passed << "/" << check.checked << "  ";
    ok = ok && check.pass_rate() >= 0.95;
  }
  return {ok, detail.str()};
}

// ---------------------------------------------------------------------------
// 5. Q(s,a) decomposes exactly into reward + discounted successor value.
Outcome criterion_bellman_consistency() {
  Rng rng(505);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int T = rng.uniform_int(3, 50);
    const ParameterSet critic = init_params(critic_spec(T), rng.next_u64());
    const ParameterSet disc =
        init_params(discriminator_spec(T), rng.next_u64());
    const State s = random_state(rng, T, rng.uniform_int(1, T - 1));
    const Action a{{rng.uniform(), rng.uniform()}};
    const double gamma = rng.uniform(0.0, 0.99);

    const State s_next = env_step(s, a);
    const double q = q_value(critic, disc, s, a, gamma);
    const double decomposed =
        reward_of(disc, s_next) + gamma * critic_forward(critic, s_next);
    worst = std::max(worst, std::abs(q - decomposed));
  }
  std::ostringstream detail;
  detail << "1000 tuples, worst |diff| " << worst;
  return {worst <= 1e-9, detail.str()};
}

// ---------------------------------------------------------------------------
// 6. dataset pipeline: shape, range, exact floor split on 11078 records,
//    seed determinism.
Outcome criterion_dataset_pipeline() {
  SyntheticConfig syn;
  syn.count = 11078;
  syn.seed = 606;
  const std::vector<RawSample> raw = synthesize_experts(syn);
  const BuildResult built = build_dataset(raw, 50, 0.8, 42);

  if (built.train.samples.size() != 8862 || built.test.samples.size() != 2216) {
    return {false, "split sizes " + std::to_string(built.train.samples.size()) +
                       "/" + std::to_string(built.test.samples.size())};
  }
  const auto well_formed = [](const Dataset& set) {
    for (const Trajectory& t : set.samples) {
      if (static_cast<int>(t.points.size()) != set.horizon) return false;
      for (const Point& p : t.points) {
        if (!in_unit_square(p)) return false;
      }
    }
    return true;
  };
  if (!well_formed(built.train) || !well_formed(built.test)) {
    return {false, "trajectory outside length/range contract"};
  }

  const BuildResult again = build_dataset(raw, 50, 0.8, 42);
  for (std::size_t i = 0; i < built.train.samples.size(); ++i) {
    if (built.train.samples[i].id != again.train.samples[i].id ||
        built.train.samples[i].points != again.train.samples[i].points) {
      return {false, "same seed produced a different split"};
    }
  }
  const BuildResult other = build_dataset(raw, 50, 0.8, 43);
  bool any_difference = false;
  for (std::size_t i = 0; i < built.train.samples.size() && !any_difference;
       ++i) {
    any_difference = built.train.samples[i].id != other.train.samples[i].id;
  }
  if (!any_difference) {
    return {false, "different seeds produced the same permutation"};
  }
  return {true, "11078 -> 8862/2216, in-square, seed-deterministic"};
}

// ---------------------------------------------------------------------------
// 7. prediction baseline: memorizes one trajectory; generalizes on straight
//    lines to held-out RMSE < 0.01.
Outcome criterion_baseline() {
  // single-trajectory memorization
  Trajectory one;
  one.id = "memo";
  for (int i = 0; i < 12; ++i) {
    const double u = static_cast<double>(i) / 11.0;
    one.points.push_back({0.1 + 0.8 * u, 0.2 + 0.5 * u + 0.1 * u * u});
  }
  Dataset memo{12, Split::train, 0, {one}};

  TrainingConfig config;
  config.horizon = 12;
  config.optimizer = OptimizerKind::adam;
  config.actor_lr = 3e-3;
  config.batch_size = 8;
  config.total_steps = 1500;
  config.metrics_interval = 500;
  config.checkpoint_interval = 1500;
  config.seed = 707;
  const fs::path dir = g_scratch / "criterion7";
  const PredictorResult memo_result =
      train_predictor(config, memo, dir / "memo", {"memo", 0});
  const double memo_loss = predictor_mse(memo_result.params, memo);
  if (!(memo_loss < 1e-4)) {
    return {false, "memorization loss " + std::to_string(memo_loss)};
  }

  // Straight-line family parameterized by slope alone. After unit-square
  // normalization the first point determines the slope, so every prefix is
  // fully predictable and held-out error measures the model, not ambiguity.
  Rng rng(717);
  std::vector<RawSample> lines;
  for (int i = 0; i < 200; ++i) {
    RawSample s;
    s.id = "line" + std::to_string(i);
    const double slope = rng.uniform(-0.8, 0.8);
    s.strokes = {{{0.0, 0.0}, {1.0, slope}}};
    lines.push_back(std::move(s));
  }
  const BuildResult built = build_dataset(lines, 20, 0.8, 717);

  TrainingConfig line_config;
  line_config.horizon = 20;
  line_config.optimizer = OptimizerKind::adam;
  line_config.actor_lr = 1e-3;
  line_config.batch_size = 32;
  line_config.total_steps = 2500;
  line_config.metrics_interval = 500;
  line_config.checkpoint_interval = 2500;
  line_config.seed = 718;
  const PredictorResult line_result =
      train_predictor(line_config, built.train, dir / "lines", {"lines", 0});
  const double held_out_rmse =
      std::sqrt(predictor_mse(line_result.params, built.test));

  std::ostringstream detail;
  detail << "memorization mse " << memo_loss << ", held-out rmse "
         << held_out_rmse;
  return {held_out_rmse < 0.01, detail.str()};
}

// ---------------------------------------------------------------------------
// 8. the synthetic-expert smoke experiment through the CLI.
Outcome criterion_smoke() {
  const fs::path dir = g_scratch / "smoke";
  std::ostringstream cmd;
  cmd << "smoke-test --out " << dir.string() << " --seed " << kSmokeSeed
      << " --experts " << kSmokeExperts << " --steps " << kSmokeSteps
      << " --baseline-steps " << kSmokeBaselineSteps;
  const int code = run_cli(cmd.str(), g_scratch / "smoke.log");
  if (code != 0) {
    return {false, "smoke-test exit " + std::to_string(code)};
  }
  const json summary = json::parse(read_file(dir / "summary.json"));
  std::ostringstream detail;
  detail << "improvement " << summary.at("improvement").get<double>()
         << " (>= 0.3), delta=" << summary.at("mode_delta").get<int>()
         << " mode bin " << summary.at("mode_bin").get<int>();
  return {summary.at("passed").get<bool>(), detail.str()};
}

// ---------------------------------------------------------------------------
// 9. three-way histogram export through eval-curvature over the smoke
//    artifacts; all rows normalized; all images render.
Outcome criterion_harness() {
  const fs::path smoke = g_scratch / "smoke";
  const fs::path dir = g_scratch / "harness";
  std::ostringstream cmd;
  cmd << "eval-curvature --expert " << (smoke / "data" / "test.jsonl").string()
      << " --gail " << (smoke / "gen" / "gen_gail.jsonl").string()
      << " --baseline " << (smoke / "gen" / "gen_baseline.jsonl").string()
      << " --out " << dir.string();
  const int code = run_cli(cmd.str(), g_scratch / "harness.log");
  if (code != 0) {
    return {false, "eval-curvature exit " + std::to_string(code)};
  }
  int rows = 0;
  for (const char* stem : {"hist_expert", "hist_gail", "hist_baseline"}) {
    const CurvatureHistogram hist =
        read_histogram(dir / (std::string(stem) + ".tsv"));
    for (int d = 0; d < hist.delta_max; ++d) {
      const double sum = hist.matrix.row(d).sum();
      if (std::abs(sum - 1.0) > 1e-9) {
        return {false, std::string(stem) + " row " + std::to_string(d + 1) +
                           " sums to " + std::to_string(sum)};
      }
      ++rows;
    }
    const std::string image = read_file(dir / (std::string(stem) + ".ppm"));
    if (image.size() < 16 || image.compare(0, 2, "P6") != 0) {
      return {false, std::string(stem) + ".ppm missing or malformed"};
    }
  }
  return {true, std::to_string(rows) + " rows normalized, 3 images rendered"};
}

// ---------------------------------------------------------------------------
// 10. exported Q-map entries equal direct recomputation.
Outcome criterion_qmap_consistency() {
  const fs::path smoke = g_scratch / "smoke";
  const json summary = json::parse(read_file(smoke / "summary.json"));
  const auto& artifacts = summary.at("artifacts");
  const QMap map =
      read_qmap(smoke / artifacts.at("qmap").get<std::string>());
  const Checkpoint critic = load_checkpoint(
      smoke / artifacts.at("critic_ckpt").get<std::string>());
  const Checkpoint disc =
      load_checkpoint(smoke / artifacts.at("disc_ckpt").get<std::string>());

  Rng rng(1010);
  double worst = 0.0;
  for (int probe = 0; probe < 10; ++probe) {
    const int i = static_cast<int>(rng.uniform_index(
        static_cast<std::uint64_t>(map.grid)));
    const int j = static_cast<int>(rng.uniform_index(
        static_cast<std::uint64_t>(map.grid)));
    const Action a{{(j + 0.5) / map.grid, (i + 0.5) / map.grid}};
    const double direct =
        q_value(critic.params, disc.params, map.state, a, map.gamma);
    worst = std::max(worst, std::abs(map.values(i, j) - direct));
  }
  std::ostringstream detail;
  detail << "10 cells, worst |diff| " << worst;
  return {worst <= 1e-9, detail.str()};
}

// ---------------------------------------------------------------------------
// 11. two serial same-seed smoke runs produce identical metrics logs (wall
//     clock aside) and identical exported histograms.
Outcome criterion_reproducibility() {
  const fs::path run_a = g_scratch / "repro_a";
  const fs::path run_b = g_scratch / "repro_b";
  for (const fs::path& dir : {run_a, run_b}) {
    std::ostringstream cmd;
    cmd << "smoke-test --out " << dir.string() << " --seed 3 --experts "
        << kReproExperts << " --steps " << kReproSteps << " --baseline-steps "
        << kReproBaselineSteps << " --workers 1";
    const int code = run_cli(cmd.str(), g_scratch / (dir.filename().string() +
                                                     ".log"));
    if (code != 0 && code != 3) {
      return {false, dir.filename().string() + " exit " + std::to_string(code)};
    }
  }

  // metrics agree record-for-record once the wall-clock field is dropped
  int records = 0;
  for (const char* log : {"gail/metrics.jsonl", "baseline/metrics.jsonl"}) {
    std::istringstream a(read_file(run_a / log));
    std::istringstream b(read_file(run_b / log));
    std::string line_a, line_b;
    while (true) {
      const bool more_a = static_cast<bool>(std::getline(a, line_a));
      const bool more_b = static_cast<bool>(std::getline(b, line_b));
      if (more_a != more_b) {
        return {false, std::string(log) + " lengths differ"};
      }
      if (!more_a) break;
      json ja = json::parse(line_a);
      json jb = json::parse(line_b);
      ja.erase("wall_seconds");
      jb.erase("wall_seconds");
      if (ja.dump() != jb.dump()) {
        return {false, std::string(log) + " record " +
                           std::to_string(records) + " differs"};
      }
      ++records;
    }
  }

  for (const char* name :
       {"eval/hist_expert.tsv", "eval/hist_gail.tsv", "eval/hist_untrained.tsv",
        "eval/hist_baseline.tsv", "eval/qmap.tsv"}) {
    if (read_file(run_a / name) != read_file(run_b / name)) {
      return {false, std::string(name) + " differs between runs"};
    }
  }
  std::ostringstream detail;
  detail << records << " metrics records identical, exports byte-equal";
  return {true, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: acceptance <cli-binary> <scratch-dir> [criteria...]\n";
    return 2;
  }
  g_cli = argv[1];
  g_scratch = argv[2];
  std::set<int> selected;
  for (int i = 3; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  std::error_code ec;
  fs::remove_all(g_scratch, ec);
  fs::create_directories(g_scratch);

  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const std::vector<Criterion> criteria = {
      {1, "environment oracle", criterion_env_oracle},
      {2, "curvature oracle", criterion_curvature_oracle},
      {3, "forward-pass oracle", criterion_forward_oracle},
      {4, "gradient check", criterion_gradcheck},
      {5, "bellman consistency", criterion_bellman_consistency},
      {6, "dataset pipeline", criterion_dataset_pipeline},
      {7, "baseline sanity", criterion_baseline},
      {8, "smoke experiment", criterion_smoke},
      {9, "comparative harness", criterion_harness},
      {10, "qmap consistency", criterion_qmap_consistency},
      {11, "reproducibility", criterion_reproducibility},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%2d] %s  %-22s (%.1f s)  %s\n", c.id,
                outcome.pass ? "PASS" : "FAIL", c.name, seconds,
                outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures) {
    std::printf("acceptance: %d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("acceptance: all criteria passed\n");
  return 0;
}
