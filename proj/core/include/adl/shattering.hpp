#pragma once

#include <functional>
#include <string>
#include <vector>

#include "adl/activations.hpp"
#include "adl/compressor.hpp"
#include "adl/numerics.hpp"
#include "adl/rng.hpp"

namespace adl {

// Sign-cube embedding into symmetric matrices supported on the first k
// rows/columns: (psi_k(x))_ij = x_i x_j / sqrt(k(2d-k)) when min(i,j) < k
// (0-based), zero otherwise; unit Frobenius norm for x in {+-1}^d.
Matrix psi_k(const Vector& x, int k);

// Frobenius inner product <psi_k(x), psi_k(y)> in O(d).
double psi_inner(const Vector& x, const Vector& y, int k);

struct ShatterInstance {
  std::vector<Vector> points;  // D vectors in {+-1}^d
  int k = 1;
  double L = 0.0;  // incoherence cap sqrt(2 ln(20 d D))
  int d() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
  int D() const { return static_cast<int>(points.size()); }
};

ShatterInstance make_instance(int d, int k, int D, RngStream rng);

struct QuadraticFn {
  std::vector<Vector> U;  // orthonormal directions
  Vector lambda;
  double eval(const Vector& x) const;
};

// Jacobi eigendecomposition of a symmetric matrix (d <= 256): A = Q diag(w) Q^T.
// Off-diagonal tolerance 1e-12; eigenvalues descending by magnitude.
void jacobi_eigen(const Matrix& A, Vector& eigenvalues, Matrix& eigenvectors);

// Monte-Carlo estimate of E ||P_V psi_k(X)||^2 over uniform cube X, where V is
// the span of the points' embeddings (rank-revealing orthogonalization,
// tolerance 1e-10). `se` receives the standard error when non-null.
double almost_orthonormality(const std::vector<Vector>& points, int k, std::int64_t trials,
                             RngStream rng, double* se = nullptr);

// Exhaustive version for small d (enumerates all 2^d cube points).
double almost_orthonormality_exact(const std::vector<Vector>& points, int k);

struct FitResult {
  bool feasible = false;
  std::string certificate;  // reason when infeasible
  QuadraticFn q;
  Vector alpha;    // Gram-system solution
  Vector margins;  // label_i * q(x_i), exactly +-1 -> 1 at the solution
};

// Minimum-Frobenius-norm interpolator with margins exactly +-1: solves the
// Gram system over the embedded points, eigendecomposes the resulting matrix
// and rescales to the quadratic form. Infeasible (with certificate) when the
// Gram matrix is singular beyond tolerance or the class constraints
// |lambda_i| <= B/sqrt(k), |<u_i, x_j>| <= L fail.
FitResult fit_quadratic_shatter(const ShatterInstance& inst, const std::vector<int>& labels,
                                double B);

// ReLU two-layer realization of 2*q via the quadratic kernel: repetition j,
// direction i computes rho(<u_i, x>/L - a_ij) with output weight
// 2 lambda_i b_ij L^2 / n_reps, so the kernel identity gives E f = 2q.
struct ReluRealization {
  std::vector<Vector> U;
  Vector lambda;
  Matrix a, b;  // n_reps x k kernel draws
  double L = 0.0;
  int n_reps = 0;

  double forward(const Vector& x) const;  // factored, never materializes the net
  double hidden_spectral_norm() const;    // sqrt(n_reps)/L by block structure
  double output_weight_sq_norm() const;
  // Explicit matrices with a constant-1 input coordinate carrying the biases;
  // intended for small n_reps.
  NetworkSpec to_network_spec() const;
};

ReluRealization quad_to_relu_net(const QuadraticFn& q, const ShatterInstance& inst, int n_reps,
                                 const QuadKernel& kernel, RngStream rng);

struct ShatterVerdict {
  bool pass = false;
  Vector margins;  // f(x_i) * label_i per point
};

ShatterVerdict verify_shattering(const ShatterInstance& inst, const std::vector<int>& labels,
                                 const std::function<double(const Vector&)>& f);

}  // namespace adl
