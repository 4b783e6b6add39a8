#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gailpen/errors.hpp"
#include "gailpen/rng.hpp"
#include "gailpen/state.hpp"
#include "test_helpers.hpp"

using namespace gailpen;

TEST_CASE("make_state holds the prefix and zero-pads the rest") {
  const std::vector<Point> prefix = {{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}};
  const State s = make_state(prefix, 8);

  CHECK(s.horizon() == 8);
  CHECK(s.length() == 3);
  CHECK_FALSE(s.full());
  REQUIRE(s.prefix().size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(s.prefix()[static_cast<std::size_t>(i)] ==
          prefix[static_cast<std::size_t>(i)]);
    CHECK(s.slot_valid(i));
    CHECK(s.slot_point(i) == prefix[static_cast<std::size_t>(i)]);
  }
  for (int i = 3; i < 8; ++i) {
    CHECK_FALSE(s.slot_valid(i));
    CHECK(s.slot_point(i) == Point{});
  }
  CHECK_FALSE(s.slot_valid(-1));
  CHECK_FALSE(s.slot_valid(8));
}

TEST_CASE("make_state rejects malformed inputs") {
  const std::vector<Point> one = {{0.5, 0.5}};
  CHECK_THROWS_AS(make_state(one, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_state(std::vector<Point>{}, 5), std::invalid_argument);
  const std::vector<Point> three = {{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}};
  CHECK_THROWS_AS(make_state(three, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_state(std::vector<Point>{{1.5, 0.5}}, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_state(std::vector<Point>{{0.5, -0.1}}, 5),
                  std::invalid_argument);
  // Boundary points are admissible.
  CHECK_NOTHROW(make_state(std::vector<Point>{{0.0, 1.0}}, 5));
}

TEST_CASE("env_step appends one point without mutating the source state") {
  const State s0 = make_state(std::vector<Point>{{0.2, 0.3}}, 4);
  const State s1 = env_step(s0, {{0.7, 0.8}});

  CHECK(s0.length() == 1);
  CHECK(s1.length() == 2);
  CHECK(s1.horizon() == 4);
  CHECK(s1.slot_point(0) == Point{0.2, 0.3});
  CHECK(s1.slot_point(1) == Point{0.7, 0.8});
  CHECK_FALSE(s1.slot_valid(2));
}

TEST_CASE("env_step validates the action and the episode bound") {
  State s = make_state(std::vector<Point>{{0.5, 0.5}}, 3);
  CHECK_THROWS_AS(env_step(s, {{1.1, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(env_step(s, {{0.5, -0.2}}), std::invalid_argument);

  s = env_step(s, {{0.4, 0.4}});
  s = env_step(s, {{0.3, 0.3}});
  CHECK(s.full());
  CHECK_THROWS_AS(env_step(s, {{0.2, 0.2}}), episode_complete);
}

TEST_CASE("env_step chains match a plain append model") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const int horizon = 2 + static_cast<int>(rng.uniform_index(30));
    std::vector<Point> model = {{rng.uniform(), rng.uniform()}};
    State s = make_state(model, horizon);
    while (!s.full()) {
      const Point a{rng.uniform(), rng.uniform()};
      model.push_back(a);
      s = env_step(s, {a});
      REQUIRE(s.length() == static_cast<int>(model.size()));
      for (std::size_t i = 0; i < model.size(); ++i) {
        REQUIRE(s.slot_point(static_cast<int>(i)) == model[i]);
      }
    }
    CHECK(s == make_state(model, horizon));
  }
}

TEST_CASE("fill_input writes (x, y, valid) columns with zero padding") {
  const std::vector<Point> prefix = {{0.25, 0.75}, {0.5, 0.125}};
  const State s = make_state(prefix, 5);
  std::vector<double> buf(3 * 5, -1.0);
  s.fill_input(buf.data());

  const std::vector<double> want = {
      0.25, 0.75, 1.0, 0.5, 0.125, 1.0, 0.0, 0.0, 0.0,
      0.0,  0.0,  0.0, 0.0, 0.0,   0.0,
  };
  REQUIRE(buf.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(buf[i] == want[i]);
  }
}

TEST_CASE("fill_input round-trips random states") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const State s = testutil::random_state(rng, 12);
    std::vector<double> buf(3 * 12);
    s.fill_input(buf.data());
    for (int i = 0; i < 12; ++i) {
      if (i < s.length()) {
        CHECK(buf[3 * i + 0] == s.slot_point(i).x);
        CHECK(buf[3 * i + 1] == s.slot_point(i).y);
        CHECK(buf[3 * i + 2] == 1.0);
      } else {
        CHECK(buf[3 * i + 0] == 0.0);
        CHECK(buf[3 * i + 1] == 0.0);
        CHECK(buf[3 * i + 2] == 0.0);
      }
    }
  }
}
