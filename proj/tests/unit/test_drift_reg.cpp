#include <doctest.h>

#include <cmath>
#include <limits>

#include "diachron/drift_reg.hpp"
#include "diachron/error.hpp"
#include "support.hpp"

using namespace diachron;
using namespace testing;

TEST_CASE("hardshrink branches") {
  CHECK(hardshrink(0.5, 1.0) == 0.0);
  CHECK(hardshrink(2.0, 1.0) == 2.0);
  CHECK(hardshrink(-2.0, 1.0) == 2.0);
  CHECK(hardshrink(1.0, 1.0) == 0.0);
  CHECK(hardshrink(-1.0, 1.0) == 0.0);
  CHECK(hardshrink(0.0, 0.0) == 0.0);
  CHECK(hardshrink(std::nextafter(1.0, 2.0), 1.0) == std::nextafter(1.0, 2.0));
}

TEST_CASE("dead zone is exactly zero") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> beta_d(0.0, 5.0), u(-1.0, 1.0);
  for (int k = 0; k < 10000; ++k) {
    const double beta = beta_d(rng);
    const double x = beta * u(rng);
    CHECK(hardshrink(x, beta) == 0.0);
    const double y = beta + 1e-9 + std::abs(x);
    CHECK(hardshrink(y, beta) == y);
    CHECK(hardshrink(-y, beta) == y);
  }
}

TEST_CASE("regularizer closed-form values") {
  // Rows differ by (0.2, 0), (0, 1.5), (3.0, 0).
  Matrix ref(3, 2), cur(3, 2);
  cur(0, 0) = 0.2;
  cur(1, 1) = 1.5;
  cur(2, 0) = 3.0;
  CHECK(std::abs(drift_regularizer(cur, ref, 0.5, 1.0) - 2.25) <= 1e-15);
  CHECK(drift_regularizer(cur, ref, 0.0, 1.0) == 0.0);
  CHECK(drift_regularizer(cur, cur, 0.5, 0.0) == 0.0);
  CHECK(drift_regularizer(cur, cur, 3.0, 1.0) == 0.0);
  CHECK(std::abs(mean_drift(cur, ref) - (0.2 + 1.5 + 3.0) / 3.0) <= 1e-15);
  CHECK_THROWS_AS(drift_regularizer(cur, Matrix(2, 2), 1.0, 1.0), Error);
}

TEST_CASE("regularizer is nonnegative") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> pos(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    const auto a = random_matrix(6, 3, rng), b = random_matrix(6, 3, rng);
    CHECK(drift_regularizer(a, b, pos(rng), pos(rng)) >= 0.0);
  }
}

TEST_CASE("gradient matches finite differences away from the kink") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pickL(1, 8), pickd(1, 5);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  double worst = 0.0;
  std::size_t checked = 0;
  for (int inst = 0; inst < 150; ++inst) {
    const std::size_t L = pickL(rng), d = pickd(rng);
    auto U = random_matrix(L, d, rng);
    const auto R = random_matrix(L, d, rng);
    const double alpha = pos(rng);
    const double beta = pos(rng);
    bool near_kink = false;
    for (std::size_t i = 0; i < L; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += (U(i, k) - R(i, k)) * (U(i, k) - R(i, k));
      if (std::abs(std::sqrt(s) - beta) < 1e-3) near_kink = true;
    }
    if (near_kink) continue;
    Matrix g(L, d);
    add_drift_regularizer_gradient(U, R, alpha, beta, 1.0, g);
    auto f = [&] { return drift_regularizer(U, R, alpha, beta); };
    for (std::size_t k = 0; k < U.size(); ++k) {
      const double num = central_difference(f, &U.values()[k]);
      worst = std::max(worst, relative_error(g.values()[k], num));
      ++checked;
    }
  }
  CHECK(checked > 500);
  CHECK(worst < 1e-4);
}

TEST_CASE("gradient is zero in the dead zone and at the kink") {
  Matrix ref(2, 2), cur(2, 2);
  cur(0, 0) = 0.6;
  cur(0, 1) = 0.8;  // drift exactly 1
  cur(1, 0) = 0.3;  // drift 0.3
  Matrix g(2, 2);
  add_drift_regularizer_gradient(cur, ref, 2.0, 1.0, 1.0, g);
  for (double x : g.values()) CHECK(x == 0.0);
  // Zero drift with beta 0 is also a kink.
  add_drift_regularizer_gradient(ref, ref, 2.0, 0.0, 1.0, g);
  for (double x : g.values()) CHECK(x == 0.0);
  // Above the threshold: alpha (u - u_ref) / drift, scaled and accumulated.
  Matrix h(2, 2, 1.0);
  add_drift_regularizer_gradient(cur, ref, 2.0, 0.5, -0.5, h);
  CHECK(std::abs(h(0, 0) - (1.0 - 0.5 * 2.0 * 0.6)) <= 1e-15);
  CHECK(std::abs(h(0, 1) - (1.0 - 0.5 * 2.0 * 0.8)) <= 1e-15);
  CHECK(h(1, 0) == 1.0);
  CHECK(h(1, 1) == 1.0);
}

TEST_CASE("configuration validation") {
  RegConfig r;
  CHECK_NOTHROW(r.validate());
  CHECK_FALSE(r.active());
  r.enabled = true;
  r.alpha = 0.5;
  CHECK(r.active());
  r.alpha = -1.0;
  CHECK_THROWS_AS(r.validate(), Error);
  r.alpha = 1.0;
  r.beta = -0.1;
  CHECK_THROWS_AS(r.validate(), Error);
  r.beta_is_mean = true;
  CHECK_NOTHROW(r.validate());
}
