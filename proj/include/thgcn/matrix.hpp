#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <initializer_list>
#include <vector>

namespace thgcn {

// Dense row-major double matrix. This is the whole numeric core: the GCN
// works on matrices of at most (n_vehicles + n_towers)^2 doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix from(std::size_t rows, std::size_t cols,
                     std::initializer_list<double> values) {
    Matrix m(rows, cols);
    assert(values.size() == rows * cols);
    std::size_t i = 0;
    for (double v : values) m.data_[i++] = v;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ &&
           (data_.empty() ||
            std::memcmp(data_.data(), o.data_.data(),
                        data_.size() * sizeof(double)) == 0);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B. Row-times-row accumulation (ikj); exact-zero entries of A are
// skipped, which changes no sums (x + 0.0 == x) but makes multiplying by the
// mostly-zero normalized adjacency cheap.
inline Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix c(a.rows(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      if (aip == 0.0) continue;
      const double* brow = b.row(p);
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  return c;
}

// C = A^T * B without forming A^T.
inline Matrix matmul_transA(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows());
  Matrix c(a.cols(), b.cols());
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      if (aip == 0.0) continue;
      double* crow = c.row(p);
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  return c;
}

// C = A * B^T.
inline Matrix matmul_transB(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.cols());
  Matrix c(a.rows(), b.rows());
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.row(i);
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c(i, j) = acc;
    }
  }
  return c;
}

inline Matrix relu(const Matrix& a) {
  Matrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i)
    r.data()[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
  return r;
}

// dA = dH ⊙ [pre > 0]; the ReLU subgradient at 0 is 0.
inline Matrix relu_backward(const Matrix& dh, const Matrix& pre) {
  assert(dh.rows() == pre.rows() && dh.cols() == pre.cols());
  Matrix r(dh.rows(), dh.cols());
  for (std::size_t i = 0; i < dh.size(); ++i)
    r.data()[i] = pre.data()[i] > 0.0 ? dh.data()[i] : 0.0;
  return r;
}

// a -= s * b  (SGD update).
inline void sub_scaled(Matrix& a, const Matrix& b, double s) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] -= s * b.data()[i];
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  assert(a.rows() == b.rows() && a.cols() == b.cols());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = std::abs(a.data()[i] - b.data()[i]);
    if (d > m) m = d;
  }
  return m;
}

inline double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
  return std::sqrt(s);
}

}  // namespace thgcn
