#pragma once

// Skip-gram negative-sampling likelihood and its analytic gradient.

#include <cmath>

#include "diachron/corpus.hpp"
#include "diachron/matrix.hpp"

namespace diachron {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow or cancellation for large |x|.
inline double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

struct LogLikelihood {
  double positive = 0.0;  // L_pos, raw sum
  double negative = 0.0;  // L_neg, raw sum
  std::size_t positive_pairs = 0;
  std::size_t negative_pairs = 0;

  double total() const noexcept { return positive + negative; }
  double mean_per_pair() const noexcept {
    const auto n = positive_pairs + negative_pairs;
    return n ? total() / static_cast<double>(n) : 0.0;
  }
  double positive_mean() const noexcept {
    return positive_pairs ? positive / static_cast<double>(positive_pairs) : 0.0;
  }
  LogLikelihood& operator+=(const LogLikelihood& o) noexcept;
};

// sum_pos log s(u_i.v_j) + sum_neg log s(-u_i.v_j)
LogLikelihood sgns_log_likelihood(const SkipGramBatch& batch, const Matrix& U, const Matrix& V);

// Adds scale * d(log-likelihood)/dU and /dV into the sparse buffers:
//   dL/du_i += (label - s(u_i.v_j)) v_j,   dL/dv_j += (label - s(u_i.v_j)) u_i.
// Returns the batch log-likelihood evaluated on the way.
LogLikelihood sgns_accumulate_gradients(const SkipGramBatch& batch, const Matrix& U,
                                        const Matrix& V, SparseRowGrad& gradU,
                                        SparseRowGrad& gradV, double scale = 1.0);

struct SgnsGradients {
  Matrix dU;
  Matrix dV;
};

// Dense convenience wrapper around sgns_accumulate_gradients.
SgnsGradients sgns_gradients(const SkipGramBatch& batch, const Matrix& U, const Matrix& V);

}  // namespace diachron
