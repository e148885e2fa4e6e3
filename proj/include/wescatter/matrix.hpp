/**
 * Small dense matrix over doubles, row major.
 *
 * Every matrix in this engine is tiny: consequent blocks are (u+1) x O and
 * the recursive-estimator corrections are (u+1) x (u+1), with u the feature
 * count of the stream (tens at most).  Plain loops over a contiguous buffer
 * are faster than any library detour at this size and, more importantly,
 * keep arithmetic order fixed so results stay bit-reproducible across
 * partition counts and worker counts.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace wsn {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity_scaled(std::size_t n, double value) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = value;
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// x . M[:,c] without materialising the column.
inline double column_dot(const std::vector<double>& x, const Matrix& m, std::size_t c) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) s += x[i] * m(i, c);
  return s;
}

inline double norm(const std::vector<double>& v) { return std::sqrt(dot(v, v)); }

}  // namespace wsn
