#include <doctest.h>

#include <cmath>

#include "adl/numerics.hpp"

using namespace adl;

namespace {

Matrix rotation5(int p, int q, double angle) {
  Matrix R = Matrix::identity(5);
  R(p, p) = std::cos(angle);
  R(q, q) = std::cos(angle);
  R(p, q) = -std::sin(angle);
  R(q, p) = std::sin(angle);
  return R;
}

Matrix matmul(const Matrix& A, const Matrix& B) {
  Matrix C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k)
      for (int j = 0; j < B.cols; ++j) C(i, j) += A(i, k) * B(k, j);
  return C;
}

}  // namespace

TEST_CASE("spectral norm of identity and diagonal") {
  CHECK(spectral_norm(Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-9));
  Matrix D(2, 2);
  D(0, 0) = 3.0;
  D(1, 1) = 4.0;
  CHECK(spectral_norm(D) == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("spectral norm of a matrix built from an explicit SVD") {
  Matrix U = matmul(rotation5(0, 1, 0.3), rotation5(2, 4, 1.1));
  Matrix V = matmul(rotation5(1, 3, -0.7), rotation5(0, 4, 2.2));
  Matrix S(5, 5);
  double sv[5] = {5.0, 2.0, 1.0, 0.5, 0.1};
  for (int i = 0; i < 5; ++i) S(i, i) = sv[i];
  // W = U S V^T
  Matrix Vt(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) Vt(i, j) = V(j, i);
  Matrix W = matmul(matmul(U, S), Vt);
  CHECK(spectral_norm(W) == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("frobenius norm") {
  Matrix Z(3, 2);
  CHECK(frobenius_norm(Z) == 0.0);
  CHECK(frobenius_norm(Matrix::identity(9)) == doctest::Approx(3.0));
  Matrix W(1, 2);
  W(0, 0) = 3.0;
  W(0, 1) = 4.0;
  CHECK(frobenius_norm(W) == doctest::Approx(5.0));
}

TEST_CASE("vector helpers") {
  Vector x = {1.0, -2.0, 2.0};
  CHECK(norm2(x) == doctest::Approx(3.0));
  CHECK(norm_inf(x) == doctest::Approx(2.0));
  CHECK(dot(x, x) == doctest::Approx(9.0));
  Matrix W(2, 3);
  W(0, 0) = 1.0;
  W(1, 2) = -1.0;
  Vector y = matvec(W, x);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(-2.0));
}

TEST_CASE("non-finite input is rejected") {
  Matrix W(1, 1);
  W(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(spectral_norm(W), InvalidInput);
}
