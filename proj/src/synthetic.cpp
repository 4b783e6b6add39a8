#include "gailpen/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gailpen/rng.hpp"

namespace gailpen {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace

void SyntheticConfig::validate() const {
  require(count >= 1, "synthetic: count must be positive");
  require(points_per_sample >= 2, "synthetic: need at least two points");
  require(line_fraction >= 0.0 && line_fraction <= 1.0,
          "synthetic: line_fraction must lie in [0, 1]");
  require(min_span > 0.0 && min_span <= max_span,
          "synthetic: bad span range");
  require(min_line_length > 0.0 && min_line_length < std::sqrt(2.0),
          "synthetic: bad minimum line length");
}

std::vector<RawSample> synthesize_experts(const SyntheticConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int n = config.points_per_sample;

  std::vector<RawSample> out;
  out.reserve(static_cast<std::size_t>(config.count));
  for (int i = 0; i < config.count; ++i) {
    RawSample sample;
    char id[16];
    std::snprintf(id, sizeof(id), "s%04d", i);
    sample.id = id;

    std::vector<Point> points(static_cast<std::size_t>(n));
    if (rng.uniform() < config.line_fraction) {
      sample.label = "line";
      Point p0{}, p1{};
      do {
        p0 = {rng.uniform(), rng.uniform()};
        p1 = {rng.uniform(), rng.uniform()};
      } while (std::hypot(p1.x - p0.x, p1.y - p0.y) < config.min_line_length);
      for (int k = 0; k < n; ++k) {
        const double s = static_cast<double>(k) / (n - 1);
        points[static_cast<std::size_t>(k)] = {p0.x + s * (p1.x - p0.x),
                                               p0.y + s * (p1.y - p0.y)};
      }
    } else {
      sample.label = "arc";
      const double span = rng.uniform(config.min_span, config.max_span);
      const double radius = rng.uniform(0.2, 0.5);
      const double start = rng.uniform(0.0, 2.0 * kPi);
      const double dir = rng.uniform() < 0.5 ? 1.0 : -1.0;
      for (int k = 0; k < n; ++k) {
        const double s = static_cast<double>(k) / (n - 1);
        const double angle = start + dir * span * s;
        points[static_cast<std::size_t>(k)] = {
            0.5 + radius * std::cos(angle), 0.5 + radius * std::sin(angle)};
      }
    }

    sample.strokes.push_back(std::move(points));
    out.push_back(std::move(sample));
  }
  return out;
}

}  // namespace gailpen
