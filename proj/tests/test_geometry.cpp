#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gailpen/geometry.hpp"
#include "gailpen/rng.hpp"

using namespace gailpen;

namespace {

// Independent resampling oracle: bisect the interpolation parameter until
// the cumulative arc length matches the target.
Point point_at(const std::vector<Point>& poly, double u) {
  const std::size_t i =
      std::min(poly.size() - 2, static_cast<std::size_t>(u));
  const double frac = u - static_cast<double>(i);
  return {poly[i].x + frac * (poly[i + 1].x - poly[i].x),
          poly[i].y + frac * (poly[i + 1].y - poly[i].y)};
}

double arc_to(const std::vector<Point>& poly, double u) {
  const std::size_t i =
      std::min(poly.size() - 2, static_cast<std::size_t>(u));
  double s = 0.0;
  for (std::size_t k = 0; k < i; ++k) {
    s += std::hypot(poly[k + 1].x - poly[k].x, poly[k + 1].y - poly[k].y);
  }
  const Point p = point_at(poly, u);
  return s + std::hypot(p.x - poly[i].x, p.y - poly[i].y);
}

Point point_at_arc_length(const std::vector<Point>& poly, double target) {
  double lo = 0.0;
  double hi = static_cast<double>(poly.size() - 1);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (arc_to(poly, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return point_at(poly, 0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("path length sums the segments") {
  std::vector<Point> poly = {{0, 0}, {1, 0}, {1, 1}};
  CHECK(path_length(poly) == doctest::Approx(2.0));
  CHECK(path_length(std::vector<Point>{{0.3, 0.7}}) == 0.0);
}

TEST_CASE("resampling a segment gives equal spacing") {
  std::vector<Point> seg = {{0, 0}, {1, 0}};
  const auto out = resample_uniform(seg, 5);
  REQUIRE(out.size() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(out[static_cast<std::size_t>(i)].x == doctest::Approx(0.25 * i));
    CHECK(out[static_cast<std::size_t>(i)].y == 0.0);
  }
}

TEST_CASE("resampling the L-shape hits the known arc lengths") {
  std::vector<Point> ell = {{0, 0}, {1, 0}, {1, 1}};
  const auto out = resample_uniform(ell, 5);
  REQUIRE(out.size() == 5);
  const std::vector<Point> expected = {
      {0, 0}, {0.5, 0}, {1, 0}, {1, 0.5}, {1, 1}};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(out[i].x == doctest::Approx(expected[i].x).epsilon(1e-12));
    CHECK(out[i].y == doctest::Approx(expected[i].y).epsilon(1e-12));
  }
}

TEST_CASE("resampling matches the arc-length bisection oracle") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Point> poly;
    for (int i = 0; i < 7; ++i) poly.push_back({rng.uniform(), rng.uniform()});
    const auto out = resample_uniform(poly, 50);
    REQUIRE(out.size() == 50);
    const double total = path_length(poly);
    const double gap = total / 49.0;
    for (std::size_t i = 1; i < out.size(); ++i) {
      const double d =
          std::hypot(out[i].x - out[i - 1].x, out[i].y - out[i - 1].y);
      // chords never exceed the arc gap; equal only on straight runs
      CHECK(d <= gap + 1e-9);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Point expect =
          point_at_arc_length(poly, gap * static_cast<double>(i));
      CHECK(out[i].x == doctest::Approx(expect.x).epsilon(1e-7));
      CHECK(out[i].y == doctest::Approx(expect.y).epsilon(1e-7));
    }
  }
}

TEST_CASE("resampling preserves endpoints exactly") {
  std::vector<Point> poly = {{0.123456, 0.77}, {0.5, 0.1}, {0.9, 0.88}};
  const auto out = resample_uniform(poly, 13);
  CHECK(out.front() == poly.front());
  CHECK(out.back() == poly.back());
}

TEST_CASE("resampling is idempotent on equally spaced input") {
  std::vector<Point> seg = {{0, 0}, {2, 1}};
  const auto once = resample_uniform(seg, 9);
  const auto twice = resample_uniform(once, 9);
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(std::abs(once[i].x - twice[i].x) < 1e-9);
    CHECK(std::abs(once[i].y - twice[i].y) < 1e-9);
  }
}

TEST_CASE("degenerate resampling replicates the point") {
  std::vector<Point> same = {{0.4, 0.6}, {0.4, 0.6}};
  const auto out = resample_uniform(same, 4);
  REQUIRE(out.size() == 4);
  for (const Point& p : out) CHECK(p == Point{0.4, 0.6});

  CHECK_THROWS_AS(resample_uniform({}, 5), std::invalid_argument);
  CHECK_THROWS_AS(resample_uniform(same, 1), std::invalid_argument);
}

TEST_CASE("normalization maps the unit square to itself") {
  std::vector<Point> poly = {{0, 0}, {1, 1}, {0.25, 0.75}};
  const auto out = normalize_unit_square(poly);
  for (std::size_t i = 0; i < poly.size(); ++i) {
    CHECK(std::abs(out[i].x - poly[i].x) < 1e-12);
    CHECK(std::abs(out[i].y - poly[i].y) < 1e-12);
  }
}

TEST_CASE("normalization centers the short extent") {
  std::vector<Point> poly = {{0, 0}, {200, 100}};
  const auto out = normalize_unit_square(poly);
  CHECK(out[0].x == doctest::Approx(0.0));
  CHECK(out[1].x == doctest::Approx(1.0));
  CHECK(out[0].y == doctest::Approx(0.25));
  CHECK(out[1].y == doctest::Approx(0.75));
}

TEST_CASE("normalization collapses zero extent to the center") {
  std::vector<Point> poly = {{3, 3}, {3, 3}};
  const auto out = normalize_unit_square(poly);
  for (const Point& p : out) CHECK(p == Point{0.5, 0.5});
}

TEST_CASE("normalization is idempotent and preserves shape") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Point> poly;
    for (int i = 0; i < 6; ++i) {
      poly.push_back({rng.uniform(-40.0, 90.0), rng.uniform(5.0, 25.0)});
    }
    const auto once = normalize_unit_square(poly);
    const auto twice = normalize_unit_square(once);
    for (std::size_t i = 0; i < once.size(); ++i) {
      CHECK(std::abs(once[i].x - twice[i].x) < 1e-12);
      CHECK(std::abs(once[i].y - twice[i].y) < 1e-12);
      CHECK(in_unit_square(once[i]));
    }
    // similarity: pairwise distance ratios preserved
    const double before = std::hypot(poly[1].x - poly[0].x, poly[1].y - poly[0].y);
    const double after = std::hypot(once[1].x - once[0].x, once[1].y - once[0].y);
    REQUIRE(before > 0.0);
    const double scale = after / before;
    for (std::size_t i = 2; i < poly.size(); ++i) {
      const double b =
          std::hypot(poly[i].x - poly[0].x, poly[i].y - poly[0].y);
      const double a =
          std::hypot(once[i].x - once[0].x, once[i].y - once[0].y);
      CHECK(a == doctest::Approx(b * scale).epsilon(1e-9));
    }
  }
}
