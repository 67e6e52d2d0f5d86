#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "gsx/checkpoint.hpp"

using namespace gsx;
using namespace gsx::ad;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("checkpoint round trip preserves names, shapes and bits") {
  Rng rng(5);
  ParameterSet params;
  Parameter& a = params.add_glorot("layer.w", 7, 3, rng);
  Parameter& b = params.add_glorot("layer.b", 1, 3, rng);
  const Matrix av = a.value;
  const Matrix bv = b.value;

  const std::string path = temp_path("gsx_ckpt_roundtrip.bin");
  save_checkpoint(params, path);

  a.value.setZero();
  b.value.setZero();
  load_checkpoint(params, path);
  CHECK(a.value == av);
  CHECK(b.value == bv);

  const auto raw = read_checkpoint(path);
  CHECK(raw.size() == 2);
  CHECK(raw.at("layer.w") == av);
  std::remove(path.c_str());
}

TEST_CASE("loading rejects unknown names and shape mismatches") {
  Rng rng(7);
  ParameterSet stored;
  stored.add_glorot("w", 4, 4, rng);
  const std::string path = temp_path("gsx_ckpt_mismatch.bin");
  save_checkpoint(stored, path);

  ParameterSet empty;
  CHECK_THROWS_AS(load_checkpoint(empty, path), DataError);

  ParameterSet wrong_shape;
  wrong_shape.add("w", 2, 2);
  CHECK_THROWS_AS(load_checkpoint(wrong_shape, path), DataError);
  std::remove(path.c_str());
}

TEST_CASE("reading a missing or corrupt file fails cleanly") {
  CHECK_THROWS_AS(read_checkpoint(temp_path("gsx_ckpt_nonexistent.bin")), DataError);
}
