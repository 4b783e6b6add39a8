#include "gailpen/state.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "gailpen/errors.hpp"

namespace gailpen {

void State::fill_input(double* dst) const {
  for (int i = 0; i < horizon_; ++i) {
    const bool valid = i < length_;
    dst[3 * i + 0] = valid ? points_[static_cast<std::size_t>(i)].x : 0.0;
    dst[3 * i + 1] = valid ? points_[static_cast<std::size_t>(i)].y : 0.0;
    dst[3 * i + 2] = valid ? 1.0 : 0.0;
  }
}

State make_state(std::span<const Point> prefix, int horizon) {
  if (horizon < 1) {
    throw std::invalid_argument("make_state: horizon must be positive");
  }
  if (prefix.empty()) {
    throw std::invalid_argument("make_state: empty prefix");
  }
  if (prefix.size() > static_cast<std::size_t>(horizon)) {
    throw std::invalid_argument(
        "make_state: prefix length " + std::to_string(prefix.size()) +
        " exceeds horizon " + std::to_string(horizon));
  }
  for (const Point& p : prefix) {
    if (!in_unit_square(p)) {
      throw std::invalid_argument(
          "make_state: coordinate outside the unit square");
    }
  }
  State s;
  s.horizon_ = horizon;
  s.length_ = static_cast<int>(prefix.size());
  s.points_.assign(static_cast<std::size_t>(horizon), Point{});
  std::copy(prefix.begin(), prefix.end(), s.points_.begin());
  return s;
}

State env_step(const State& state, const Action& action) {
  if (state.full()) {
    throw episode_complete("env_step: state already holds " +
                           std::to_string(state.horizon()) + " points");
  }
  if (!in_unit_square(action.point)) {
    throw std::invalid_argument(
        "env_step: action outside the unit square");
  }
  State next = state;
  next.points_[static_cast<std::size_t>(next.length_)] = action.point;
  ++next.length_;
  return next;
}

}  // namespace gailpen
