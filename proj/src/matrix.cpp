#include "diachron/matrix.hpp"

#include <algorithm>
#include <cmath>

namespace diachron {

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

void SparseRowGrad::touch_all() {
  for (WordId i = 0; i < touched_flag_.size(); ++i) {
    if (!touched_flag_[i]) {
      touched_flag_[i] = 1;
      touched_.push_back(i);
    }
  }
}

void SparseRowGrad::clear() {
  for (WordId i : touched_) {
    auto r = grad_.row(i);
    std::fill(r.begin(), r.end(), 0.0);
    touched_flag_[i] = 0;
  }
  touched_.clear();
}

}  // namespace diachron
