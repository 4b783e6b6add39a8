#pragma once

#include <filesystem>
#include <span>

#include <Eigen/Dense>

#include "gailpen/geometry.hpp"
#include "gailpen/network.hpp"
#include "gailpen/state.hpp"

namespace gailpen {

// Curvature of the trajectory at index t probed at scale delta: 1/r of the
// circumcircle through the points at t-delta, t, t+delta. Collinear triples
// (|twice the signed area| below 1e-12) count as zero curvature. Indices are
// zero-based.
double curvature_at(const Trajectory& traj, int t, int delta);

// Row d-1 holds the normalized curvature distribution at scale d. A row with
// no valid triples stays all-zero.
struct CurvatureHistogram {
  int delta_max = 0;
  int bins = 0;
  double kappa_max = 0.0;
  Eigen::MatrixXd matrix;  // delta_max x bins, rows sum to 1 (or 0)

  bool same_shape(const CurvatureHistogram& other) const {
    return delta_max == other.delta_max && bins == other.bins &&
           kappa_max == other.kappa_max;
  }
};

// Histogram over all (trajectory, t) pairs with t in [t_lo, t_hi) whose
// offsets t +- delta stay inside the trajectory; curvatures at or above
// kappa_max accumulate in the top bin. Each delta row is normalized
// independently.
CurvatureHistogram curvature_histogram(std::span<const Trajectory> trajs,
                                       int t_lo, int t_hi, int delta_max,
                                       int bins, double kappa_max);

// Mean over delta of the total-variation distance (half L1) between
// corresponding rows; lies in [0, 1].
double histogram_distance(const CurvatureHistogram& a,
                          const CurvatureHistogram& b);

// Q over every candidate next position for one fixed state: entry (i, j) is
// the Q-value of the action at the cell center ((j+0.5)/G, (i+0.5)/G).
struct QMap {
  int grid = 0;
  double gamma = 0.0;
  Eigen::MatrixXd values;  // grid x grid
  State state;             // the conditioning state
};

QMap qmap(const ParameterSet& critic_params, const ParameterSet& disc_params,
          const State& state, int grid, double gamma, int workers = 1);

// Copies the first t0 points of the source bitwise, then extends to the full
// horizon with a noiseless actor rollout. Keeps the source label and id.
Trajectory generate_from_prefix(const ParameterSet& actor_params,
                                const Trajectory& source, int t0);

// Tab-delimited exports. The histogram file carries a header row naming the
// bin edges; the Q-map file gets a JSON sidecar (<path>.state.json) holding
// the grid, gamma and the conditioning state. Values are written with full
// round-trip precision, so reading back reproduces them exactly.
void write_histogram(const CurvatureHistogram& hist,
                     const std::filesystem::path& destination);
CurvatureHistogram read_histogram(const std::filesystem::path& source);

void write_qmap(const QMap& map, const std::filesystem::path& destination);
QMap read_qmap(const std::filesystem::path& source);

}  // namespace gailpen
