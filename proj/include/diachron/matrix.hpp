#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace diachron {

using WordId = std::uint32_t;

// Row-major L x d matrix of doubles. Rows are word (or context) vectors.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  void fill(double value);
  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Point-estimate embeddings (U_t word vectors, V_t context vectors).
using EmbeddingMatrix = Matrix;

// Diagonal Gaussian over an L x d matrix.
struct GaussianMatrix {
  Matrix mean;
  Matrix variance;
};

// Gradient buffer that remembers which rows were written since the last clear.
class SparseRowGrad {
 public:
  SparseRowGrad() = default;
  SparseRowGrad(std::size_t rows, std::size_t cols)
      : grad_(rows, cols), touched_flag_(rows, 0) {}

  std::span<double> row(WordId i) {
    if (!touched_flag_[i]) {
      touched_flag_[i] = 1;
      touched_.push_back(i);
    }
    return grad_.row(i);
  }
  const Matrix& dense() const noexcept { return grad_; }
  Matrix& dense() noexcept { return grad_; }
  const std::vector<WordId>& touched() const noexcept { return touched_; }
  // Marks every row as touched (used when a dense term is added).
  void touch_all();
  void clear();

 private:
  Matrix grad_;
  std::vector<std::uint8_t> touched_flag_;
  std::vector<WordId> touched_;
};

}  // namespace diachron
