#include "adl/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "adl/rng.hpp"

namespace adl {

bool all_finite(const Vector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const Matrix& m) { return all_finite(m.a); }

double dot(const Vector& x, const Vector& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(const Vector& x) { return std::sqrt(dot(x, x)); }

double norm_inf(const Vector& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

Vector matvec(const Matrix& W, const Vector& x) {
  if (static_cast<int>(x.size()) != W.cols) throw InvalidInput("matvec: dimension mismatch");
  Vector y(W.rows, 0.0);
  for (int i = 0; i < W.rows; ++i) {
    double s = 0.0;
    const double* row = &W.a[static_cast<std::size_t>(i) * W.cols];
    for (int j = 0; j < W.cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Matrix matsub(const Matrix& A, const Matrix& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw InvalidInput("matsub: shape mismatch");
  Matrix C(A.rows, A.cols);
  for (std::size_t i = 0; i < A.a.size(); ++i) C.a[i] = A.a[i] - B.a[i];
  return C;
}

double frobenius_norm(const Matrix& W) {
  if (!all_finite(W)) throw InvalidInput("frobenius_norm: non-finite entries");
  double s = 0.0;
  for (double v : W.a) s += v * v;
  return std::sqrt(s);
}

namespace {

// One multiplication by W^T W without forming the product.
Vector gram_apply(const Matrix& W, const Vector& x) {
  Vector wx = matvec(W, x);
  Vector y(W.cols, 0.0);
  for (int i = 0; i < W.rows; ++i) {
    const double* row = &W.a[static_cast<std::size_t>(i) * W.cols];
    double wi = wx[i];
    for (int j = 0; j < W.cols; ++j) y[j] += row[j] * wi;
  }
  return y;
}

double power_iterate(const Matrix& W, Vector v, int max_iter, double tol) {
  double lambda = 0.0;
  double prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector y = gram_apply(W, v);
    double ny = norm2(y);
    if (ny == 0.0) return 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] /= ny;
    lambda = ny;
    if (prev >= 0.0 && std::fabs(lambda - prev) <= tol * std::max(lambda, 1e-300)) {
      v = std::move(y);
      break;
    }
    prev = lambda;
    v = std::move(y);
  }
  return std::sqrt(lambda);
}

}  // namespace

double spectral_norm(const Matrix& W) {
  if (!all_finite(W)) throw InvalidInput("spectral_norm: non-finite entries");
  double fro = frobenius_norm(W);
  if (fro == 0.0) return 0.0;

  const double tol = 1e-9;
  const int max_iter = 10000;

  Vector v(W.cols, 1.0 / std::sqrt(static_cast<double>(W.cols)));
  double s = power_iterate(W, v, max_iter, tol);

  // All-ones start can be orthogonal to the top singular space; restart with a
  // seeded random vector and keep the larger estimate.
  if (s < fro / std::sqrt(static_cast<double>(std::min(W.rows, W.cols))) - tol * fro || s == 0.0) {
    RngStream rng(0x5eed5eedULL);
    Vector r(W.cols);
    for (auto& x : r) x = rng.gaussian();
    double nr = norm2(r);
    for (auto& x : r) x /= nr;
    s = std::max(s, power_iterate(W, r, max_iter, tol));
  }
  return s;
}

}  // namespace adl
