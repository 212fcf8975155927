#include "diachron/drift_reg.hpp"

#include <cmath>

#include "diachron/error.hpp"
#include "diachron/kernels.hpp"

namespace diachron {

void RegConfig::validate() const {
  if (!(alpha >= 0.0)) throw usage_error("regularization alpha must be >= 0");
  if (!beta_is_mean && !(beta >= 0.0)) throw usage_error("regularization beta must be >= 0");
}

double drift_regularizer(const Matrix& U_t, const Matrix& U_ref, double alpha, double beta) {
  if (!U_t.same_shape(U_ref)) throw usage_error("drift_regularizer: shape mismatch");
  if (alpha == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < U_t.rows(); ++i)
    sum += hardshrink(std::sqrt(kernels::squared_distance(U_t.row(i), U_ref.row(i))), beta);
  return alpha * sum;
}

void add_drift_regularizer_gradient(const Matrix& U_t, const Matrix& U_ref, double alpha,
                                    double beta, double scale, Matrix& grad) {
  if (!U_t.same_shape(U_ref) || !U_t.same_shape(grad))
    throw usage_error("drift regularizer gradient: shape mismatch");
  if (alpha == 0.0) return;
  const auto& k = kernels::active();
  const std::size_t d = U_t.cols();
  for (std::size_t i = 0; i < U_t.rows(); ++i) {
    const auto u = U_t.row(i);
    const auto r = U_ref.row(i);
    const double drift = std::sqrt(k.squared_distance(u.data(), r.data(), d));
    if (!(drift > beta) || drift == 0.0) continue;  // dead zone and kink: subgradient 0
    const double c = scale * alpha / drift;
    auto g = grad.row(i);
    k.axpy(c, u.data(), g.data(), d);
    k.axpy(-c, r.data(), g.data(), d);
  }
}

double mean_drift(const Matrix& U_t, const Matrix& U_ref) {
  if (!U_t.same_shape(U_ref)) throw usage_error("mean_drift: shape mismatch");
  if (U_t.rows() == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < U_t.rows(); ++i)
    sum += std::sqrt(kernels::squared_distance(U_t.row(i), U_ref.row(i)));
  return sum / static_cast<double>(U_t.rows());
}

}  // namespace diachron
