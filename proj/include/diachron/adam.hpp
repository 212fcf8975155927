#pragma once

// Adam with bias correction. Convention: the gradient passed in is the
// gradient of an objective being MAXIMIZED, and parameters move uphill.
// Minimizers pass the negated loss gradient.

#include <cstdint>
#include <string>

#include "diachron/matrix.hpp"

namespace diachron {

struct AdamState {
  Matrix m;
  Matrix v;
  std::uint64_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::string name;  // used in error messages

  AdamState() = default;
  AdamState(std::size_t rows, std::size_t cols, std::string name_ = {})
      : m(rows, cols), v(rows, cols), name(std::move(name_)) {}
  static AdamState like(const Matrix& params, std::string name_ = {}) {
    return AdamState(params.rows(), params.cols(), std::move(name_));
  }
};

// Dense update of every entry.
void adam_step(Matrix& params, const Matrix& grad, AdamState& state, double learning_rate);

// Lazy update: only rows listed in grad.touched() are read or written;
// moments of untouched rows do not decay. step_count still advances once.
void adam_step(Matrix& params, const SparseRowGrad& grad, AdamState& state,
               double learning_rate);

}  // namespace diachron
