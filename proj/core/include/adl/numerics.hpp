#pragma once

#include <cstddef>
#include <vector>

#include "adl/errors.hpp"

namespace adl {

using Vector = std::vector<double>;

// Dense row-major matrix of 64-bit reals.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {
    if (r <= 0 || c <= 0) throw InvalidInput("matrix dimensions must be positive");
  }

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  static Matrix identity(int d) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }
};

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

double dot(const Vector& x, const Vector& y);
double norm2(const Vector& x);
double norm_inf(const Vector& x);

Vector matvec(const Matrix& W, const Vector& x);
Matrix matsub(const Matrix& A, const Matrix& B);

double frobenius_norm(const Matrix& W);

// Largest singular value via power iteration on W^T W; relative tolerance
// 1e-9, at most 10000 iterations, deterministic all-ones start with a seeded
// random restart if the iteration stagnates near zero.
double spectral_norm(const Matrix& W);

}  // namespace adl
