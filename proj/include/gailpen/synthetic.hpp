#pragma once

#include <cstdint>
#include <vector>

#include "gailpen/dataset.hpp"

namespace gailpen {

// Clean expert strokes for end-to-end smoke experiments: straight segments
// (zero curvature) mixed with constant-curvature circular arcs. After unit
// square normalization the arc curvatures stay well below 1, so the expert
// curvature distribution concentrates in the lowest bins of the standard
// histogram.
struct SyntheticConfig {
  int count = 500;
  int points_per_sample = 120;
  double line_fraction = 0.6;
  double min_span = 0.25;  // arc angular span, radians
  double max_span = 1.0;
  double min_line_length = 0.3;
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

std::vector<RawSample> synthesize_experts(const SyntheticConfig& config);

}  // namespace gailpen
