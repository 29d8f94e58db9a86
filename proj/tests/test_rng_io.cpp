#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "memsim/errors.hpp"
#include "memsim/io.hpp"
#include "memsim/rng.hpp"

using namespace memsim;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("same seed gives the same stream") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("derived seeds separate streams by tag") {
  const std::uint64_t master = 42;
  std::set<std::uint64_t> seen;
  for (const char* tag : {"synth", "dataset/train", "dataset/eval",
                          "train/init", "sweep/trial/0", "sweep/trial/1"}) {
    seen.insert(derive_seed(master, tag));
  }
  CHECK(seen.size() == 6);
  CHECK(derive_seed(master, "synth") == derive_seed(master, "synth"));
  CHECK(derive_seed(master, "synth") != derive_seed(master + 1, "synth"));
}

TEST_CASE("uniform01 stays in the half-open unit interval") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("below covers its range without bias artifacts") {
  Rng rng(11);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) {
    std::uint64_t v = rng.below(5);
    REQUIRE(v < 5);
    ++counts[static_cast<size_t>(v)];
  }
  for (int c : counts) {
    CHECK(c > 9000);  // 10000 expected per bucket
    CHECK(c < 11000);
  }
}

TEST_CASE("truncated normal respects its bounds and keeps a near-unit std") {
  Rng rng(5);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = rng.truncated_normal(-3.0, 3.0);
    REQUIRE(z >= -3.0);
    REQUIRE(z <= 3.0);
    sum += z;
    sq += z * z;
  }
  double mean = sum / n;
  double std = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean) < 0.01);
  // Clipping at three sigma shrinks the std to 0.98658.
  CHECK(std == doctest::Approx(0.98658).epsilon(0.01));
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.0, -0.0, 1.0, -1.5, 0.1, 1e-300, 3.141592653589793,
                   31622.776601683792, 1e6, -0.83291624958291632}) {
    CHECK(io::parse_double(io::format_double(v)) == v);
  }
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("parse_double rejects trailing garbage") {
  CHECK_THROWS_AS(io::parse_double("1.5x"), IoError);
  CHECK_THROWS_AS(io::parse_double(""), IoError);
  CHECK_THROWS_AS(io::parse_int("12.5"), IoError);
}

TEST_CASE("atomic_write then read_file round-trips") {
  auto path = temp_file("memsim_io_roundtrip.txt");
  io::atomic_write(path, "line\n");
  CHECK(io::read_file(path) == "line\n");
  io::atomic_write(path, "replaced\n");
  CHECK(io::read_file(path) == "replaced\n");
  std::filesystem::remove(path);
}

TEST_CASE("read_csv checks header and row arity") {
  auto path = temp_file("memsim_io_table.csv");
  io::atomic_write(path, "a,b\n1,2\n3,4\n");
  io::CsvTable t = io::read_csv(path, "a,b");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][1] == "4");
  CHECK_THROWS_AS(io::read_csv(path, "a,c"), IoError);
  io::atomic_write(path, "a,b\n1\n");
  CHECK_THROWS_AS(io::read_csv(path, "a,b"), IoError);
  std::filesystem::remove(path);
}
