#include "diachron/adam.hpp"

#include <cmath>

#include "diachron/error.hpp"
#include "diachron/kernels.hpp"

namespace diachron {

namespace {

kernels::AdamCoeffs prepare(const Matrix& params, const Matrix& grad, AdamState& state,
                            double learning_rate) {
  if (!(learning_rate > 0.0)) throw usage_error("learning rate must be > 0");
  if (!params.same_shape(grad))
    throw usage_error("Adam: gradient shape does not match parameter matrix '" + state.name + "'");
  if (state.m.empty() && !params.empty()) {
    state.m = Matrix(params.rows(), params.cols());
    state.v = Matrix(params.rows(), params.cols());
  }
  if (!state.m.same_shape(params))
    throw usage_error("Adam: state shape does not match parameter matrix '" + state.name + "'");
  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  return {state.beta1, state.beta2, state.epsilon,
          learning_rate / (1.0 - std::pow(state.beta1, t)),
          1.0 / (1.0 - std::pow(state.beta2, t))};
}

void check_row(std::span<const double> g, const AdamState& state, std::size_t row) {
  for (double x : g)
    if (std::isnan(x))
      throw numerical_error("NaN gradient for parameter matrix '" + state.name + "' (row " +
                            std::to_string(row) + ")");
}

}  // namespace

void adam_step(Matrix& params, const Matrix& grad, AdamState& state, double learning_rate) {
  for (std::size_t i = 0; i < grad.rows(); ++i) check_row(grad.row(i), state, i);
  const auto c = prepare(params, grad, state, learning_rate);
  kernels::active().adam_ascent(params.values().data(), grad.values().data(),
                                state.m.values().data(), state.v.values().data(), params.size(),
                                c);
}

void adam_step(Matrix& params, const SparseRowGrad& grad, AdamState& state,
               double learning_rate) {
  const Matrix& g = grad.dense();
  for (WordId i : grad.touched()) check_row(g.row(i), state, i);
  const auto c = prepare(params, g, state, learning_rate);
  const auto& k = kernels::active();
  const std::size_t d = params.cols();
  for (WordId i : grad.touched())
    k.adam_ascent(params.row(i).data(), g.row(i).data(), state.m.row(i).data(),
                  state.v.row(i).data(), d, c);
}

}  // namespace diachron
