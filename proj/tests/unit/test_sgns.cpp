#include <doctest.h>

#include <cmath>

#include "diachron/sgns.hpp"
#include "support.hpp"

using namespace diachron;
using namespace testing;

namespace {

// Independent scalar-loop evaluation of the skip-gram log-likelihood.
double brute_force_ll(const SkipGramBatch& b, const Matrix& U, const Matrix& V) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    double dot = 0.0;
    for (std::size_t j = 0; j < U.cols(); ++j) dot += U(b.center_ids[k], j) * V(b.context_ids[k], j);
    const double p = 1.0 / (1.0 + std::exp(-dot));
    s += b.labels[k] == Label::positive ? std::log(p) : std::log(1.0 - p);
  }
  return s;
}

}  // namespace

TEST_CASE("sigmoid") {
  CHECK(sigmoid(0.0) == 0.5);
  for (double x : {-3.0, 1.7, 40.0}) CHECK(sigmoid(x) == doctest::Approx(1.0 - sigmoid(-x)));
  // Extended-precision oracle; the exact value 1 - 4.25e-18 rounds to 1.0 in
  // double, and the tail is recovered through the negative branch.
  const long double exact = 1.0L / (1.0L + std::exp(-40.0L));
  CHECK(sigmoid(40.0) == static_cast<double>(exact));
  CHECK(sigmoid(40.0) <= 1.0);
  CHECK(sigmoid(-40.0) == doctest::Approx(static_cast<double>(1.0L - exact)).epsilon(1e-3));
  CHECK(sigmoid(-40.0) == doctest::Approx(std::exp(-40.0) / (1.0 + std::exp(-40.0))).epsilon(1e-14));
  CHECK(std::isfinite(sigmoid(-800.0)));
  CHECK(log_sigmoid(-800.0) == doctest::Approx(-800.0));
  CHECK(log_sigmoid(0.0) == doctest::Approx(-std::log(2.0)));
}

TEST_CASE("log-likelihood of zero dot products") {
  Matrix U(2, 3), V(2, 3);
  SkipGramBatch b;
  b.push(0, 1, Label::positive);
  auto ll = sgns_log_likelihood(b, U, V);
  CHECK(ll.total() == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  b.push(1, 0, Label::negative);
  ll = sgns_log_likelihood(b, U, V);
  CHECK(ll.total() == doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(ll.positive == doctest::Approx(-std::log(2.0)));
  CHECK(ll.positive_pairs == 1);
}

TEST_CASE("log-likelihood matches a scalar oracle and is nonpositive") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto U = random_matrix(6, 3, rng), V = random_matrix(6, 3, rng);
    const auto b = random_batch(6, 5, rng);
    const auto ll = sgns_log_likelihood(b, U, V);
    CHECK(std::abs(ll.total() - brute_force_ll(b, U, V)) < 1e-12);
    CHECK(ll.total() <= 0.0);
  }
}

TEST_CASE("gradients: empty batch and the single-pair case") {
  std::mt19937_64 rng(3);
  const auto U = random_matrix(4, 3, rng), V = random_matrix(4, 3, rng);
  const auto g = sgns_gradients(SkipGramBatch{}, U, V);
  for (double x : g.dU.values()) CHECK(x == 0.0);
  for (double x : g.dV.values()) CHECK(x == 0.0);

  Matrix Uz(2, 2), Vz(2, 2);
  Vz(1, 0) = 0.8;
  Vz(1, 1) = -0.4;
  SkipGramBatch b;
  b.push(0, 1, Label::positive);
  const auto g1 = sgns_gradients(b, Uz, Vz);
  CHECK(g1.dU(0, 0) == doctest::Approx(0.4));
  CHECK(g1.dU(0, 1) == doctest::Approx(-0.2));
}

TEST_CASE("gradients match central finite differences over random instances") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<std::size_t> Ld(2, 8), dd(1, 5), nd(1, 12);
  double worst = 0.0;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t L = Ld(rng), d = dd(rng);
    auto U = random_matrix(L, d, rng), V = random_matrix(L, d, rng);
    const auto b = random_batch(L, nd(rng), rng);
    const auto g = sgns_gradients(b, U, V);
    auto f = [&] { return sgns_log_likelihood(b, U, V).total(); };
    for (std::size_t k = 0; k < U.size(); ++k) {
      worst = std::max(worst, relative_error(g.dU.values()[k], central_difference(f, &U.values()[k])));
      worst = std::max(worst, relative_error(g.dV.values()[k], central_difference(f, &V.values()[k])));
    }
  }
  CHECK(worst < 1e-4);
}
