#pragma once

// Shared fixtures for the unit tests: seeded random instances and a central
// finite-difference helper.

#include <cmath>
#include <functional>
#include <random>

#include "diachron/corpus.hpp"
#include "diachron/matrix.hpp"

namespace testing {

using namespace diachron;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                            double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Matrix m(rows, cols);
  for (double& x : m.values()) x = n(rng);
  return m;
}

inline SkipGramBatch random_batch(std::size_t L, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<WordId> w(0, static_cast<WordId>(L - 1));
  std::bernoulli_distribution pos(0.5);
  SkipGramBatch b;
  for (std::size_t k = 0; k < n; ++k)
    b.push(w(rng), w(rng), pos(rng) ? Label::positive : Label::negative);
  return b;
}

// Central difference of f with respect to *x.
inline double central_difference(const std::function<double()>& f, double* x, double h = 1e-5) {
  const double x0 = *x;
  *x = x0 + h;
  const double up = f();
  *x = x0 - h;
  const double down = f();
  *x = x0;
  return (up - down) / (2.0 * h);
}

// |a - b| / max(|a|, |b|, floor): relative error that tolerates gradients
// that are exactly zero.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testing
