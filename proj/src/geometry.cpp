#include "gailpen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gailpen {

bool in_unit_square(const Point& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0.0 &&
         p.x <= 1.0 && p.y >= 0.0 && p.y <= 1.0;
}

double path_length(std::span<const Point> polyline) {
  double total = 0.0;
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    total += std::hypot(polyline[i].x - polyline[i - 1].x,
                        polyline[i].y - polyline[i - 1].y);
  }
  return total;
}

std::vector<Point> resample_uniform(std::span<const Point> polyline,
                                    int target_len) {
  if (polyline.empty()) {
    throw std::invalid_argument("resample_uniform: empty polyline");
  }
  if (target_len < 2) {
    throw std::invalid_argument("resample_uniform: target_len must be >= 2");
  }
  for (const Point& p : polyline) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("resample_uniform: non-finite coordinate");
    }
  }

  std::vector<double> cumulative(polyline.size(), 0.0);
  for (std::size_t i = 1; i < polyline.size(); ++i) {
    cumulative[i] = cumulative[i - 1] +
                    std::hypot(polyline[i].x - polyline[i - 1].x,
                               polyline[i].y - polyline[i - 1].y);
  }
  const double total = cumulative.back();

  std::vector<Point> out(static_cast<std::size_t>(target_len));
  if (polyline.size() == 1 || total == 0.0) {
    std::fill(out.begin(), out.end(), polyline.front());
    return out;
  }

  out.front() = polyline.front();
  out.back() = polyline.back();
  std::size_t seg = 0;
  for (int k = 1; k + 1 < target_len; ++k) {
    const double s = total * static_cast<double>(k) /
                     static_cast<double>(target_len - 1);
    while (seg + 2 < polyline.size() && cumulative[seg + 1] < s) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double alpha = seg_len > 0.0 ? (s - cumulative[seg]) / seg_len : 0.0;
    out[static_cast<std::size_t>(k)] = {
        polyline[seg].x + alpha * (polyline[seg + 1].x - polyline[seg].x),
        polyline[seg].y + alpha * (polyline[seg + 1].y - polyline[seg].y)};
  }
  return out;
}

std::vector<Point> normalize_unit_square(std::span<const Point> polyline) {
  if (polyline.empty()) {
    throw std::invalid_argument("normalize_unit_square: empty polyline");
  }
  double min_x = polyline[0].x, max_x = polyline[0].x;
  double min_y = polyline[0].y, max_y = polyline[0].y;
  for (const Point& p : polyline) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument(
          "normalize_unit_square: non-finite coordinate");
    }
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double width = max_x - min_x;
  const double height = max_y - min_y;
  const double extent = std::max(width, height);

  std::vector<Point> out(polyline.size());
  if (extent == 0.0) {
    std::fill(out.begin(), out.end(), Point{0.5, 0.5});
    return out;
  }
  const double offset_x = (1.0 - width / extent) / 2.0;
  const double offset_y = (1.0 - height / extent) / 2.0;
  for (std::size_t i = 0; i < polyline.size(); ++i) {
    out[i] = {(polyline[i].x - min_x) / extent + offset_x,
              (polyline[i].y - min_y) / extent + offset_y};
  }
  return out;
}

}  // namespace gailpen
