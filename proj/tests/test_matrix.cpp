#include "thgcn/matrix.hpp"

#include <gtest/gtest.h>

#include "thgcn/rng.hpp"

using thgcn::Matrix;

namespace {

// Textbook ijk triple loop, used as the independent oracle.
Matrix matmul_oracle(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * b(p, j);
      c(i, j) = acc;
    }
  return c;
}

Matrix random_matrix(std::size_t r, std::size_t c, thgcn::RngStream& s,
                     double zero_fraction) {
  Matrix m(r, c);
  for (std::size_t i = 0; i < m.size(); ++i)
    m.data()[i] = s.uniform() < zero_fraction ? 0.0 : s.uniform(-2.0, 2.0);
  return m;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

TEST(Matrix, MatmulHandExample) {
  Matrix a = Matrix::from(2, 3, {1, 2, 3, 4, 5, 6});
  Matrix b = Matrix::from(3, 2, {7, 8, 9, 10, 11, 12});
  Matrix c = matmul(a, b);
  EXPECT_DOUBLE_EQ(c(0, 0), 58.0);
  EXPECT_DOUBLE_EQ(c(0, 1), 64.0);
  EXPECT_DOUBLE_EQ(c(1, 0), 139.0);
  EXPECT_DOUBLE_EQ(c(1, 1), 154.0);
}

TEST(Matrix, MatmulMatchesOracleIncludingZeroHeavyInputs) {
  thgcn::RngStream s(9, "matmul");
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 1 + s.uniform_int(12);
    std::size_t k = 1 + s.uniform_int(12);
    std::size_t m = 1 + s.uniform_int(12);
    double zf = trial % 3 == 0 ? 0.9 : (trial % 3 == 1 ? 0.5 : 0.0);
    Matrix a = random_matrix(n, k, s, zf);
    Matrix b = random_matrix(k, m, s, 0.0);
    EXPECT_EQ(matmul(a, b).rows(), n);
    EXPECT_LE(max_abs_diff(matmul(a, b), matmul_oracle(a, b)), 1e-12);
  }
}

TEST(Matrix, TransposedVariantsMatchExplicitTranspose) {
  thgcn::RngStream s(10, "trans");
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 1 + s.uniform_int(10);
    std::size_t k = 1 + s.uniform_int(10);
    std::size_t m = 1 + s.uniform_int(10);
    Matrix a = random_matrix(n, k, s, 0.3);
    Matrix b = random_matrix(n, m, s, 0.3);
    EXPECT_LE(max_abs_diff(matmul_transA(a, b), matmul(transpose(a), b)), 1e-12);
    Matrix c = random_matrix(m, k, s, 0.3);
    EXPECT_LE(max_abs_diff(matmul_transB(a, c), matmul(a, transpose(c))), 1e-12);
  }
}

TEST(Matrix, ReluAndBackward) {
  Matrix a = Matrix::from(2, 2, {-1.0, 0.0, 2.0, -0.5});
  Matrix r = relu(a);
  EXPECT_DOUBLE_EQ(r(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(r(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(r(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(r(1, 1), 0.0);

  Matrix dh = Matrix::from(2, 2, {5, 6, 7, 8});
  Matrix da = relu_backward(dh, a);
  EXPECT_DOUBLE_EQ(da(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(da(0, 1), 0.0);  // subgradient 0 at the kink
  EXPECT_DOUBLE_EQ(da(1, 0), 7.0);
  EXPECT_DOUBLE_EQ(da(1, 1), 0.0);
}

TEST(Matrix, SubScaled) {
  Matrix a = Matrix::from(1, 3, {1, 2, 3});
  Matrix g = Matrix::from(1, 3, {10, 20, 30});
  sub_scaled(a, g, 0.1);
  EXPECT_DOUBLE_EQ(a(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(a(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(a(0, 2), 0.0);
}

TEST(Matrix, EqualityIsBitwise) {
  Matrix a = Matrix::from(1, 2, {1.0, 2.0});
  Matrix b = Matrix::from(1, 2, {1.0, 2.0});
  Matrix c = Matrix::from(1, 2, {1.0, 2.0 + 1e-16});
  EXPECT_TRUE(a == b);
  EXPECT_TRUE(a == c);  // 2.0 + 1e-16 rounds to 2.0 in double
  c(0, 1) = 2.0000000001;
  EXPECT_FALSE(a == c);
}

}  // namespace
