#pragma once

#include <span>
#include <string>
#include <vector>

namespace gailpen {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Ordered 2D polyline with an optional character label and sample id.
// After dataset preprocessing every trajectory has exactly `horizon` points
// inside the unit square.
struct Trajectory {
  std::vector<Point> points;
  std::string label;
  std::string id;
};

bool in_unit_square(const Point& p);

// Total length of the piecewise-linear path through the points.
double path_length(std::span<const Point> polyline);

// Resamples the polyline to exactly target_len points at equal arc-length
// spacing, interpolating linearly between input points. The first and last
// input points are preserved exactly. A single-point or zero-length input
// is replicated target_len times.
std::vector<Point> resample_uniform(std::span<const Point> polyline,
                                    int target_len);

// Aspect-preserving map into [0,1]^2: uniform scale by 1/max(width, height),
// longer extent spanning exactly [0,1], shorter extent centered. A polyline
// with zero extent maps to (0.5, 0.5).
std::vector<Point> normalize_unit_square(std::span<const Point> polyline);

}  // namespace gailpen
