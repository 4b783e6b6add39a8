#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gailpen/evaluation.hpp"
#include "gailpen/geometry.hpp"

namespace gailpen {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  // row-major, 3 bytes per pixel, row 0 on top
};

// Binary PPM (P6). Byte-identical output for identical images.
void write_ppm(const Image& image, const std::filesystem::path& destination);

// Unit-square polyline on a white canvas, y up, with a marker on the first
// point.
Image render_trajectory(std::span<const Point> points, int size = 256);

// Heat image (low = blue, high = red through white) with the conditioning
// prefix drawn on top. Each grid cell becomes a cell x cell pixel block.
Image render_qmap(const QMap& map, int cell = 4);

// Rows are the scales delta (1 at the top), columns the curvature bins; mass
// darkens the cell. An all-zero histogram renders as a blank canvas.
Image render_histogram(const CurvatureHistogram& hist, int cell = 8);

}  // namespace gailpen
