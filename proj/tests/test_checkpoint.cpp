#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gailpen/checkpoint.hpp"
#include "gailpen/errors.hpp"
#include "gailpen/network.hpp"
#include "gailpen/version.hpp"
#include "test_helpers.hpp"

using namespace gailpen;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

using testutil::bitwise_equal;

TEST_CASE("checkpoints round-trip bitwise") {
  testutil::TempDir dir("ckpt");
  const ParameterSet params = init_params(actor_spec(9), 1234);
  const CheckpointMeta meta{"actor", 1234, 77, ""};
  const auto path = dir.path() / "actor_000077.ckpt";
  save_checkpoint(path, params, meta);

  const Checkpoint loaded = load_checkpoint(path);
  CHECK(bitwise_equal(loaded.params, params));
  CHECK(loaded.meta.kind == "actor");
  CHECK(loaded.meta.seed == 1234);
  CHECK(loaded.meta.step == 77);
  CHECK(loaded.meta.version == std::string(kVersion));
  CHECK(loaded.params.spec == actor_spec(9));

  // no stray temporary left behind
  int files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path())) {
    (void)entry;
    ++files;
  }
  CHECK(files == 1);
}

TEST_CASE("checkpoint writes are byte-reproducible") {
  testutil::TempDir dir("ckpt_repro");
  const ParameterSet params = init_params(critic_spec(5), 9);
  const CheckpointMeta meta{"critic", 9, 0, ""};
  save_checkpoint(dir.path() / "a.ckpt", params, meta);
  save_checkpoint(dir.path() / "b.ckpt", params, meta);
  CHECK(slurp(dir.path() / "a.ckpt") == slurp(dir.path() / "b.ckpt"));
}

TEST_CASE("loader rejects corrupted checkpoints") {
  testutil::TempDir dir("ckpt_bad");
  const ParameterSet params = init_params(discriminator_spec(4), 3);
  const auto good = dir.path() / "good.ckpt";
  save_checkpoint(good, params, {"discriminator", 3, 5, ""});
  const std::string bytes = slurp(good);

  SUBCASE("bad magic") {
    std::string bad = bytes;
    bad[0] = 'X';
    std::ofstream(dir.path() / "bad.ckpt", std::ios::binary) << bad;
    CHECK_THROWS_AS(load_checkpoint(dir.path() / "bad.ckpt"), io_error);
  }
  SUBCASE("unknown format version") {
    std::string bad = bytes;
    bad[4] = 'a';  // format version bytes follow the 4-byte magic
    std::ofstream(dir.path() / "bad.ckpt", std::ios::binary) << bad;
    CHECK_THROWS_AS(load_checkpoint(dir.path() / "bad.ckpt"), io_error);
  }
  SUBCASE("truncated payload") {
    std::ofstream(dir.path() / "bad.ckpt", std::ios::binary)
        << bytes.substr(0, bytes.size() / 2);
    CHECK_THROWS_AS(load_checkpoint(dir.path() / "bad.ckpt"), io_error);
  }
  SUBCASE("trailing garbage") {
    std::ofstream(dir.path() / "bad.ckpt", std::ios::binary) << bytes << "!";
    CHECK_THROWS_AS(load_checkpoint(dir.path() / "bad.ckpt"), io_error);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_checkpoint(dir.path() / "nope.ckpt"), io_error);
  }
}

TEST_CASE("values survive the round trip exactly, including extremes") {
  testutil::TempDir dir("ckpt_vals");
  ParameterSet params = ParameterSet::zeros(critic_spec(3));
  params.conv1_w(0, 0) = 1.0 / 3.0;
  params.conv1_w(1, 1) = -0.0;
  params.conv1_b(2) = 5e-324;  // smallest subnormal
  params.conv2_w(3, 4) = 1.7976931348623157e308;
  params.dense_w(0, 5) = -2.2250738585072014e-308;

  const auto path = dir.path() / "vals.ckpt";
  save_checkpoint(path, params, {"critic", 0, 0, ""});
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(bitwise_equal(loaded.params, params));
  CHECK(std::signbit(loaded.params.conv1_w(1, 1)));
}
