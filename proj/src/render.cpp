#include "gailpen/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "gailpen/errors.hpp"

namespace gailpen {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

struct Color {
  unsigned char r, g, b;
};

Image blank(int width, int height, Color fill) {
  Image img;
  img.width = width;
  img.height = height;
  img.rgb.resize(static_cast<std::size_t>(width) * height * 3);
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = fill.r;
    img.rgb[i + 1] = fill.g;
    img.rgb[i + 2] = fill.b;
  }
  return img;
}

void put_pixel(Image& img, int x, int y, Color c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  const std::size_t at =
      (static_cast<std::size_t>(y) * img.width + static_cast<std::size_t>(x)) * 3;
  img.rgb[at] = c.r;
  img.rgb[at + 1] = c.g;
  img.rgb[at + 2] = c.b;
}

void draw_line(Image& img, int x0, int y0, int x1, int y1, Color c) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  for (;;) {
    put_pixel(img, x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

// unit-square point to pixel, y axis pointing up
int to_px(double v, int extent) {
  return static_cast<int>(std::lround(v * (extent - 1)));
}

void draw_polyline(Image& img, std::span<const Point> points, Color c) {
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    draw_line(img, to_px(points[i].x, img.width),
              to_px(1.0 - points[i].y, img.height),
              to_px(points[i + 1].x, img.width),
              to_px(1.0 - points[i + 1].y, img.height), c);
  }
  if (points.size() == 1) {
    put_pixel(img, to_px(points[0].x, img.width),
              to_px(1.0 - points[0].y, img.height), c);
  }
}

void draw_marker(Image& img, const Point& p, Color c) {
  const int cx = to_px(p.x, img.width);
  const int cy = to_px(1.0 - p.y, img.height);
  for (int dy = -2; dy <= 2; ++dy) {
    for (int dx = -2; dx <= 2; ++dx) {
      put_pixel(img, cx + dx, cy + dy, c);
    }
  }
}

Color heat(double t) {
  // blue through white to red
  t = std::min(1.0, std::max(0.0, t));
  const auto lerp = [](double a, double b, double s) {
    return static_cast<unsigned char>(std::lround(a + (b - a) * s));
  };
  if (t < 0.5) {
    const double s = t / 0.5;
    return {lerp(40, 255, s), lerp(60, 255, s), lerp(200, 255, s)};
  }
  const double s = (t - 0.5) / 0.5;
  return {lerp(255, 200, s), lerp(255, 40, s), lerp(255, 40, s)};
}

}  // namespace

void write_ppm(const Image& image, const std::filesystem::path& destination) {
  require(image.width > 0 && image.height > 0 &&
              image.rgb.size() ==
                  static_cast<std::size_t>(image.width) * image.height * 3,
          "write_ppm: malformed image");
  std::ofstream out(destination, std::ios::trunc | std::ios::binary);
  if (!out) throw io_error(destination.string(), "cannot open for writing");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()),
            static_cast<std::streamsize>(image.rgb.size()));
  if (!out) throw io_error(destination.string(), "write failed");
}

Image render_trajectory(std::span<const Point> points, int size) {
  require(size >= 8, "render_trajectory: image too small");
  require(!points.empty(), "render_trajectory: no points");
  Image img = blank(size, size, {255, 255, 255});
  draw_polyline(img, points, {0, 0, 0});
  draw_marker(img, points.front(), {200, 30, 30});
  return img;
}

Image render_qmap(const QMap& map, int cell) {
  require(cell >= 1, "render_qmap: cell size must be positive");
  require(map.grid >= 1, "render_qmap: empty map");
  const int size = map.grid * cell;
  Image img = blank(size, size, {255, 255, 255});

  const double lo = map.values.minCoeff();
  const double hi = map.values.maxCoeff();
  const double span = hi - lo;
  for (int i = 0; i < map.grid; ++i) {
    for (int j = 0; j < map.grid; ++j) {
      const double t = span > 0.0 ? (map.values(i, j) - lo) / span : 0.5;
      const Color c = heat(t);
      // row i holds y = (i + 0.5) / G; y axis points up in the image
      const int py0 = (map.grid - 1 - i) * cell;
      const int px0 = j * cell;
      for (int dy = 0; dy < cell; ++dy) {
        for (int dx = 0; dx < cell; ++dx) {
          put_pixel(img, px0 + dx, py0 + dy, c);
        }
      }
    }
  }

  draw_polyline(img, map.state.prefix(), {0, 0, 0});
  if (!map.state.prefix().empty()) {
    draw_marker(img, map.state.prefix().front(), {0, 0, 0});
  }
  return img;
}

Image render_histogram(const CurvatureHistogram& hist, int cell) {
  require(cell >= 1, "render_histogram: cell size must be positive");
  require(hist.delta_max >= 1 && hist.bins >= 1,
          "render_histogram: empty histogram");
  Image img = blank(hist.bins * cell, hist.delta_max * cell, {255, 255, 255});

  const double peak = hist.matrix.maxCoeff();
  if (peak <= 0.0) return img;  // nothing to draw; blank canvas
  for (int d = 0; d < hist.delta_max; ++d) {
    for (int b = 0; b < hist.bins; ++b) {
      const double t = hist.matrix(d, b) / peak;
      const auto v = static_cast<unsigned char>(
          std::lround(255.0 * (1.0 - t)));
      const Color c{v, v, v};
      for (int dy = 0; dy < cell; ++dy) {
        for (int dx = 0; dx < cell; ++dx) {
          put_pixel(img, b * cell + dx, d * cell + dy, c);
        }
      }
    }
  }
  return img;
}

}  // namespace gailpen
