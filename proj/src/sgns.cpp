#include "diachron/sgns.hpp"

#include "diachron/kernels.hpp"

namespace diachron {

LogLikelihood& LogLikelihood::operator+=(const LogLikelihood& o) noexcept {
  positive += o.positive;
  negative += o.negative;
  positive_pairs += o.positive_pairs;
  negative_pairs += o.negative_pairs;
  return *this;
}

LogLikelihood sgns_log_likelihood(const SkipGramBatch& batch, const Matrix& U, const Matrix& V) {
  LogLikelihood ll;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double s = kernels::dot(U.row(batch.center_ids[k]), V.row(batch.context_ids[k]));
    if (batch.labels[k] == Label::positive) {
      ll.positive += log_sigmoid(s);
      ++ll.positive_pairs;
    } else {
      ll.negative += log_sigmoid(-s);
      ++ll.negative_pairs;
    }
  }
  return ll;
}

LogLikelihood sgns_accumulate_gradients(const SkipGramBatch& batch, const Matrix& U,
                                        const Matrix& V, SparseRowGrad& gradU,
                                        SparseRowGrad& gradV, double scale) {
  const auto& k_ = kernels::active();
  const std::size_t d = U.cols();
  LogLikelihood ll;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const WordId i = batch.center_ids[k];
    const WordId j = batch.context_ids[k];
    const auto u = U.row(i);
    const auto v = V.row(j);
    const double s = k_.dot(u.data(), v.data(), d);
    double coeff;
    if (batch.labels[k] == Label::positive) {
      ll.positive += log_sigmoid(s);
      ++ll.positive_pairs;
      coeff = sigmoid(-s);  // 1 - s(x)
    } else {
      ll.negative += log_sigmoid(-s);
      ++ll.negative_pairs;
      coeff = -sigmoid(s);
    }
    coeff *= scale;
    k_.axpy(coeff, v.data(), gradU.row(i).data(), d);
    k_.axpy(coeff, u.data(), gradV.row(j).data(), d);
  }
  return ll;
}

SgnsGradients sgns_gradients(const SkipGramBatch& batch, const Matrix& U, const Matrix& V) {
  SparseRowGrad gU(U.rows(), U.cols());
  SparseRowGrad gV(V.rows(), V.cols());
  sgns_accumulate_gradients(batch, U, V, gU, gV);
  return {gU.dense(), gV.dense()};
}

}  // namespace diachron
