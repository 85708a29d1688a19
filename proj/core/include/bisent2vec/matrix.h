#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bisent2vec {

// Dense row-major float32 matrix. Rows are handed out as spans; the trainer
// mutates rows concurrently without synchronization (hogwild contract).
class Matrix {
 public:
  Matrix() = default;
  Matrix(int64_t rows, int64_t cols)
      : rows_(rows), cols_(cols),
        data_(static_cast<size_t>(rows) * static_cast<size_t>(cols), 0.0f) {}

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }

  std::span<float> row(int64_t i) {
    return {data_.data() + i * cols_, static_cast<size_t>(cols_)};
  }
  std::span<const float> row(int64_t i) const {
    return {data_.data() + i * cols_, static_cast<size_t>(cols_)};
  }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  size_t size() const { return data_.size(); }

  bool operator==(const Matrix& other) const = default;

 private:
  int64_t rows_ = 0;
  int64_t cols_ = 0;
  std::vector<float> data_;
};

// Dot product with a double accumulator: cheap, and accurate enough that
// finite-difference gradient checks see a smooth loss.
inline double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += double(a[i]) * double(b[i]);
  return s;
}

inline void axpy(float alpha, std::span<const float> x, std::span<float> y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline double norm2(std::span<const float> a) { return dot(a, a); }

}  // namespace bisent2vec
