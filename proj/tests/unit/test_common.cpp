#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "cnrel/common.hpp"

using namespace cnrel;

TEST_CASE("rng is deterministic per seed") {
  Rng a(42), b(42), c(43);
  bool same = true, diff = false;
  for (int i = 0; i < 16; ++i) {
    uint64_t va = a.next();
    same = same && va == b.next();
    diff = diff || va != c.next();
  }
  CHECK(same);
  CHECK(diff);
}

TEST_CASE("rng index stays in range") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    CHECK(rng.index(1) == 0);
    CHECK(rng.index(3) < 3);
    CHECK(rng.index(1000) < 1000);
  }
}

TEST_CASE("rng real in unit interval with sane mean") {
  Rng rng(11);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double v = rng.real();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
  }
  CHECK(std::abs(sum / n - 0.5) < 0.02);
}

TEST_CASE("rng normal has unit variance") {
  Rng rng(13);
  double sum = 0.0, sq = 0.0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  double mean = sum / n;
  double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("shuffle permutes and is seed-stable") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  std::vector<int> w = v;
  Rng(5).shuffle(v);
  Rng(5).shuffle(w);
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);

  std::vector<int> tiny = {9};
  Rng(5).shuffle(tiny);
  CHECK(tiny == std::vector<int>{9});
}

TEST_CASE("mix_seed separates streams") {
  CHECK(mix_seed(1, "init") == mix_seed(1, "init"));
  CHECK(mix_seed(1, "init") != mix_seed(1, "epoch:1"));
  CHECK(mix_seed(1, "init") != mix_seed(2, "init"));
  CHECK(mix_seed(3, "epoch:1") != mix_seed(3, "epoch:11"));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.0, 1.0, -1.0, 0.1, 1.0 / 3.0, 2586.0, 1e-300, 6.02e23, -0.75}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("parse_double rejects garbage") {
  CHECK_THROWS_AS(parse_double("abc"), Error);
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
  CHECK_THROWS_AS(parse_double(""), Error);
  try {
    parse_double("high");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
  }
}

TEST_CASE("string helpers") {
  CHECK(split("a\tb\tc", '\t') == std::vector<std::string>{"a", "b", "c"});
  CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
  CHECK(split_whitespace("  one\ttwo \n three ") ==
        std::vector<std::string>{"one", "two", "three"});
  CHECK(join({"x", "y", "z"}, "_") == "x_y_z");
  CHECK(join({}, "_") == "");
  CHECK(lowercase("MiXeD 42") == "mixed 42");
}

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("file io round-trips binary content") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "cnrel_common_io_test.bin";
  std::string payload = std::string("line\n\r\n") + '\0' + "tail";
  write_file(path.string(), payload);
  CHECK(read_file(path.string()) == payload);
  fs::remove(path);
  CHECK_THROWS_AS(read_file(path.string()), Error);
}
