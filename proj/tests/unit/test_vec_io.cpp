#include <doctest.h>

#include <cmath>
#include <sstream>

#include "diachron/error.hpp"
#include "diachron/vec_io.hpp"
#include "support.hpp"

using namespace diachron;

TEST_CASE("word vectors round-trip exactly") {
  std::mt19937_64 rng(1);
  auto m = testing::random_matrix(3, 4, rng);
  m(0, 0) = 1e-300;
  m(1, 2) = -123456.789012345678;
  const std::vector<std::string> words{"alpha", "beta", "gamma"};
  std::stringstream ss;
  write_vectors(ss, words, m);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "3 4");
  ss.seekg(0);
  const auto back = read_vectors(ss);
  CHECK(back.words == words);
  CHECK(back.values == m);
}

TEST_CASE("malformed vector files are data errors") {
  std::stringstream short_row("2 3\na 1 2 3\nb 1 2\n");
  CHECK_THROWS_AS(read_vectors(short_row), Error);
  std::stringstream bad_header("x y\n");
  CHECK_THROWS_AS(read_vectors(bad_header), Error);
  std::stringstream bad_number("1 2\na 1 zz\n");
  CHECK_THROWS_AS(read_vectors(bad_number), Error);
}

TEST_CASE("optimizer state round-trips") {
  std::mt19937_64 rng(2);
  AdamState s(2, 3, "U");
  s.m = testing::random_matrix(2, 3, rng);
  s.v = testing::random_matrix(2, 3, rng);
  for (double& x : s.v.values()) x = std::abs(x);
  s.step_count = 17;
  std::stringstream ss;
  write_adam_state(ss, s);
  write_adam_state(ss, s);
  for (int k = 0; k < 2; ++k) {
    const auto back = read_adam_state(ss);
    CHECK(back.m == s.m);
    CHECK(back.v == s.v);
    CHECK(back.step_count == 17);
    CHECK(back.beta2 == s.beta2);
  }
}
