#pragma once

#include <span>
#include <vector>

#include "gailpen/geometry.hpp"

namespace gailpen {

struct Action;

// Fixed-horizon pen-trajectory state: a sequence of `horizon` slots, each a
// (x, y, valid) triple. The first length() slots hold the written prefix
// with valid = 1; the remaining slots are (0, 0, 0). Instances can only be
// built through make_state / env_step, so the padding invariant holds by
// construction.
class State {
 public:
  State() = default;

  int horizon() const { return horizon_; }
  int length() const { return length_; }
  bool full() const { return length_ == horizon_; }

  // Written prefix, slots [0, length).
  std::span<const Point> prefix() const {
    return {points_.data(), static_cast<std::size_t>(length_)};
  }

  bool slot_valid(int i) const { return i >= 0 && i < length_; }
  Point slot_point(int i) const {
    return slot_valid(i) ? points_[static_cast<std::size_t>(i)] : Point{};
  }

  // Writes the network input: a 3 x horizon column-major block, one column
  // per slot with rows (x, y, valid). dst must hold 3 * horizon() doubles.
  void fill_input(double* dst) const;

  bool operator==(const State&) const = default;

  friend State make_state(std::span<const Point> prefix, int horizon);
  friend State env_step(const State& state, const Action& action);

 private:
  int horizon_ = 0;
  int length_ = 0;
  std::vector<Point> points_;  // size == horizon_, zeros past length_
};

// The next pen-tip position. No continuity constraint: any point of the
// unit square is admissible regardless of the current state.
struct Action {
  Point point;
  bool operator==(const Action&) const = default;
};

// Builds the zero-padded state holding `prefix`. Requires
// 1 <= prefix.size() <= horizon and every point inside the unit square.
State make_state(std::span<const Point> prefix, int horizon);

// Deterministic transition: returns a copy of `state` whose slot length()
// is replaced by (action.x, action.y, 1). Throws episode_complete when the
// state is already full.
State env_step(const State& state, const Action& action);

}  // namespace gailpen
