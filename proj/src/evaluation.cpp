#include "gailpen/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "gailpen/errors.hpp"
#include "gailpen/manifest.hpp"
#include "gailpen/parallel.hpp"
#include "gailpen/trainer.hpp"

namespace gailpen {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

constexpr double kCollinearEps = 1e-12;

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, std::size_t line,
                    const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw parse_error(line, path + ": bad number '" + token + "'");
  }
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

double curvature_at(const Trajectory& traj, int t, int delta) {
  require(delta >= 1, "curvature_at: delta must be positive");
  const auto len = static_cast<int>(traj.points.size());
  if (t - delta < 0 || t + delta >= len) {
    throw std::invalid_argument("curvature_at: index out of range");
  }
  const Point a = traj.points[static_cast<std::size_t>(t - delta)];
  const Point b = traj.points[static_cast<std::size_t>(t)];
  const Point c = traj.points[static_cast<std::size_t>(t + delta)];

  // twice the signed triangle area
  const double cross =
      (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (std::abs(cross) < kCollinearEps) return 0.0;

  // circumcenter from the two perpendicular-bisector equations
  const double a2 = a.x * a.x + a.y * a.y;
  const double b2 = b.x * b.x + b.y * b.y;
  const double c2 = c.x * c.x + c.y * c.y;
  const double d = 2.0 * cross;
  const double ux =
      (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
  const double uy =
      (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
  const double r = std::hypot(a.x - ux, a.y - uy);
  return 1.0 / r;
}

CurvatureHistogram curvature_histogram(std::span<const Trajectory> trajs,
                                       int t_lo, int t_hi, int delta_max,
                                       int bins, double kappa_max) {
  require(!trajs.empty(), "curvature_histogram: empty trajectory set");
  require(delta_max >= 1, "curvature_histogram: delta_max must be positive");
  require(bins >= 1, "curvature_histogram: bins must be positive");
  require(kappa_max > 0.0, "curvature_histogram: kappa_max must be positive");
  require(t_lo >= 0 && t_lo < t_hi, "curvature_histogram: bad index window");
  for (const Trajectory& traj : trajs) {
    require(static_cast<int>(traj.points.size()) >= t_hi,
            "curvature_histogram: trajectory shorter than the window");
  }

  CurvatureHistogram hist;
  hist.delta_max = delta_max;
  hist.bins = bins;
  hist.kappa_max = kappa_max;
  hist.matrix = Eigen::MatrixXd::Zero(delta_max, bins);

  const double bin_width = kappa_max / static_cast<double>(bins);
  for (int delta = 1; delta <= delta_max; ++delta) {
    double count = 0.0;
    for (const Trajectory& traj : trajs) {
      const auto len = static_cast<int>(traj.points.size());
      const int lo = std::max(t_lo, delta);
      const int hi = std::min(t_hi, len - delta);
      for (int t = lo; t < hi; ++t) {
        const double kappa = curvature_at(traj, t, delta);
        const int bin = std::min(
            bins - 1, static_cast<int>(std::floor(kappa / bin_width)));
        hist.matrix(delta - 1, bin) += 1.0;
        count += 1.0;
      }
    }
    if (count > 0.0) hist.matrix.row(delta - 1) /= count;
  }
  return hist;
}

double histogram_distance(const CurvatureHistogram& a,
                          const CurvatureHistogram& b) {
  require(a.same_shape(b), "histogram_distance: shape mismatch");
  double total = 0.0;
  for (int d = 0; d < a.delta_max; ++d) {
    total += 0.5 * (a.matrix.row(d) - b.matrix.row(d)).cwiseAbs().sum();
  }
  return total / static_cast<double>(a.delta_max);
}

QMap qmap(const ParameterSet& critic_params, const ParameterSet& disc_params,
          const State& state, int grid, double gamma, int workers) {
  require(grid >= 1, "qmap: grid must be positive");
  require(critic_params.spec.output_dim == 1 &&
              critic_params.spec.squash == Squash::identity,
          "qmap: not a critic parameter set");
  require(disc_params.spec.output_dim == 1 &&
              disc_params.spec.squash == Squash::logistic,
          "qmap: not a discriminator parameter set");
  require(state.horizon() == critic_params.spec.sequence_length &&
              state.horizon() == disc_params.spec.sequence_length,
          "qmap: horizon mismatch");
  if (state.full()) throw episode_complete("qmap: state is full");

  QMap map;
  map.grid = grid;
  map.gamma = gamma;
  map.state = state;
  map.values.resize(grid, grid);

  const int total = grid * grid;
  constexpr int kChunk = 256;  // bounds the batched-forward scratch size
  const int chunks = (total + kChunk - 1) / kChunk;
  parallel_for(static_cast<std::size_t>(chunks), workers, [&](std::size_t c) {
    const int lo = static_cast<int>(c) * kChunk;
    const int hi = std::min(total, lo + kChunk);
    std::vector<State> successors;
    successors.reserve(static_cast<std::size_t>(hi - lo));
    for (int cell = lo; cell < hi; ++cell) {
      const int i = cell / grid;
      const int j = cell % grid;
      const Action a{{(j + 0.5) / static_cast<double>(grid),
                      (i + 0.5) / static_cast<double>(grid)}};
      successors.push_back(env_step(state, a));
    }
    BatchWorkspace disc_ws;
    disc_ws.forward(disc_params, successors);
    BatchWorkspace critic_ws;
    critic_ws.forward(critic_params, successors);
    for (int cell = lo; cell < hi; ++cell) {
      const int k = cell - lo;
      const double reward =
          reward_from_probability(disc_ws.outputs()(0, k));
      map.values(cell / grid, cell % grid) =
          reward + gamma * critic_ws.outputs()(0, k);
    }
  });
  return map;
}

Trajectory generate_from_prefix(const ParameterSet& actor_params,
                                const Trajectory& source, int t0) {
  require(actor_params.spec.output_dim == 2 &&
              actor_params.spec.squash == Squash::logistic,
          "generate_from_prefix: not an actor-shaped parameter set");
  const int T = actor_params.spec.sequence_length;
  require(static_cast<int>(source.points.size()) == T,
          "generate_from_prefix: source length must equal the horizon");
  require(t0 >= 1 && t0 < T, "generate_from_prefix: t0 out of range");

  State s = make_state({source.points.data(), static_cast<std::size_t>(t0)}, T);
  while (!s.full()) {
    s = env_step(s, actor_forward(actor_params, s));
  }
  Trajectory out;
  out.points.assign(s.prefix().begin(), s.prefix().end());
  out.label = source.label;
  out.id = source.id;
  return out;
}

void write_histogram(const CurvatureHistogram& hist,
                     const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::trunc | std::ios::binary);
  if (!out) throw io_error(destination.string(), "cannot open for writing");

  // header row: the shared bin edges; data rows: delta then one value per bin
  out << "delta\\edges";
  const double bin_width = hist.kappa_max / static_cast<double>(hist.bins);
  for (int b = 0; b <= hist.bins; ++b) {
    out << '\t' << format_full(bin_width * b);
  }
  out << '\n';
  for (int d = 0; d < hist.delta_max; ++d) {
    out << (d + 1);
    for (int b = 0; b < hist.bins; ++b) {
      out << '\t' << format_full(hist.matrix(d, b));
    }
    out << '\n';
  }
  if (!out) throw io_error(destination.string(), "write failed");
}

CurvatureHistogram read_histogram(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw io_error(source.string(), "cannot open");
  const std::string path = source.string();

  std::string line;
  if (!std::getline(in, line)) throw parse_error(1, path + ": empty file");
  const auto header = split_tabs(line);
  if (header.size() < 3 || header[0] != "delta\\edges") {
    throw parse_error(1, path + ": bad header");
  }
  const int bins = static_cast<int>(header.size()) - 2;
  const double kappa_max = parse_double(header.back(), 1, path);

  CurvatureHistogram hist;
  hist.bins = bins;
  hist.kappa_max = kappa_max;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    if (static_cast<int>(cells.size()) != bins + 1) {
      throw parse_error(line_no, path + ": wrong column count");
    }
    const double delta = parse_double(cells[0], line_no, path);
    if (delta != static_cast<double>(rows.size() + 1)) {
      throw parse_error(line_no, path + ": rows out of order");
    }
    std::vector<double> row(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
      row[static_cast<std::size_t>(b)] =
          parse_double(cells[static_cast<std::size_t>(b + 1)], line_no, path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw parse_error(line_no, path + ": no data rows");

  hist.delta_max = static_cast<int>(rows.size());
  hist.matrix.resize(hist.delta_max, bins);
  for (int d = 0; d < hist.delta_max; ++d) {
    for (int b = 0; b < bins; ++b) {
      hist.matrix(d, b) = rows[static_cast<std::size_t>(d)]
                              [static_cast<std::size_t>(b)];
    }
  }
  return hist;
}

void write_qmap(const QMap& map, const std::filesystem::path& destination) {
  {
    std::ofstream out(destination, std::ios::trunc | std::ios::binary);
    if (!out) throw io_error(destination.string(), "cannot open for writing");
    for (int i = 0; i < map.grid; ++i) {
      for (int j = 0; j < map.grid; ++j) {
        if (j > 0) out << '\t';
        out << format_full(map.values(i, j));
      }
      out << '\n';
    }
    if (!out) throw io_error(destination.string(), "write failed");
  }

  nlohmann::json points = nlohmann::json::array();
  for (const Point& p : map.state.prefix()) {
    points.push_back({p.x, p.y});
  }
  write_json_file(destination.string() + ".state.json",
                  {{"grid", map.grid},
                   {"gamma", map.gamma},
                   {"horizon", map.state.horizon()},
                   {"prefix", points}});
}

QMap read_qmap(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw io_error(source.string(), "cannot open");
  const std::string path = source.string();

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_tabs(line);
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      row.push_back(parse_double(cell, line_no, path));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw parse_error(1, path + ": empty matrix");
  const auto grid = rows.size();
  for (const auto& row : rows) {
    if (row.size() != grid) {
      throw parse_error(1, path + ": matrix is not square");
    }
  }

  QMap map;
  map.grid = static_cast<int>(grid);
  map.values.resize(map.grid, map.grid);
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      map.values(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
  }

  const std::filesystem::path sidecar = source.string() + ".state.json";
  std::ifstream side(sidecar, std::ios::binary);
  if (!side) throw io_error(sidecar.string(), "cannot open");
  nlohmann::json meta;
  try {
    side >> meta;
    map.gamma = meta.at("gamma").get<double>();
    if (meta.at("grid").get<int>() != map.grid) {
      throw io_error(sidecar.string(), "grid mismatch");
    }
    const int horizon = meta.at("horizon").get<int>();
    std::vector<Point> prefix;
    for (const auto& pair : meta.at("prefix")) {
      prefix.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    }
    map.state = make_state(prefix, horizon);
  } catch (const nlohmann::json::exception& e) {
    throw io_error(sidecar.string(), std::string("bad sidecar: ") + e.what());
  }
  return map;
}

}  // namespace gailpen
