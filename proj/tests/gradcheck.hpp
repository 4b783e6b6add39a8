#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include "gailpen/network.hpp"
#include "gailpen/rng.hpp"

namespace testutil {

struct GradCheck {
  int checked = 0;
  int passed = 0;
  double worst = 0.0;

  double pass_rate() const {
    return checked ? static_cast<double>(passed) / checked : 0.0;
  }
};

// Central-difference check of d(loss)/d(parameter) on `coords` sampled
// coordinates. The relative error uses max(|fd|, |analytic|, 1e-8) as the
// denominator so near-zero gradients compare on an absolute scale.
inline GradCheck fd_param_check(
    const gailpen::ParameterSet& params, const gailpen::ParameterSet& analytic,
    const std::function<double(const gailpen::ParameterSet&)>& loss,
    gailpen::Rng& rng, int coords, double step, double rel_tol) {
  GradCheck result;
  gailpen::ParameterSet work = params;
  auto work_arrays = work.arrays();
  const auto grad_arrays = analytic.arrays();
  const auto total = static_cast<std::size_t>(work.total_size());
  for (int c = 0; c < coords; ++c) {
    std::size_t flat = rng.uniform_index(total);
    std::size_t arr = 0;
    while (flat >= static_cast<std::size_t>(work_arrays[arr].size)) {
      flat -= static_cast<std::size_t>(work_arrays[arr].size);
      ++arr;
    }
    double* slot = work_arrays[arr].data + static_cast<std::ptrdiff_t>(flat);
    const double saved = *slot;
    *slot = saved + step;
    const double up = loss(work);
    *slot = saved - step;
    const double down = loss(work);
    *slot = saved;
    const double fd = (up - down) / (2.0 * step);
    const double an = grad_arrays[arr].data[static_cast<std::ptrdiff_t>(flat)];
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-8});
    const double rel = std::abs(fd - an) / denom;
    ++result.checked;
    if (rel <= rel_tol) ++result.passed;
    result.worst = std::max(result.worst, rel);
  }
  return result;
}

}  // namespace testutil
