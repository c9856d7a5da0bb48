#include <doctest.h>

#include <cmath>

#include "adl/shattering.hpp"

using namespace adl;

namespace {

std::vector<int> random_labels(int D, RngStream rng) {
  std::vector<int> labels(static_cast<std::size_t>(D));
  for (auto& v : labels) v = rng.bernoulli(0.5) ? 1 : -1;
  return labels;
}

}  // namespace

TEST_CASE("psi_k images have unit Frobenius norm and even symmetry") {
  RngStream rng(1);
  for (int d : {5, 12}) {
    for (int k = 1; k <= d; k += d - 1 > 0 ? std::max(1, d / 3) : 1) {
      ShatterInstance inst = make_instance(d, k, 1, rng.child(static_cast<std::uint64_t>(d * 100 + k)));
      const Vector& x = inst.points[0];
      Matrix P = psi_k(x, k);
      CHECK(frobenius_norm(P) == doctest::Approx(1.0).epsilon(1e-12));
      Vector neg(x);
      for (auto& v : neg) v = -v;
      Matrix Pn = psi_k(neg, k);
      for (std::size_t i = 0; i < P.a.size(); ++i) CHECK(P.a[i] == Pn.a[i]);
      // inner product shortcut matches the explicit Frobenius sum
      ShatterInstance other = make_instance(d, k, 1, rng.child(static_cast<std::uint64_t>(d * 100 + k + 7)));
      Matrix Q = psi_k(other.points[0], k);
      double full = 0.0;
      for (std::size_t i = 0; i < P.a.size(); ++i) full += P.a[i] * Q.a[i];
      CHECK(psi_inner(x, other.points[0], k) == doctest::Approx(full).epsilon(1e-12));
      CHECK(psi_inner(x, x, k) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(psi_k({0.5, 1.0}, 1), InvalidInput);
  CHECK_THROWS_AS(psi_k({1.0, -1.0}, 3), InvalidInput);
}

TEST_CASE("k = d gives the full rank-one matrix") {
  Vector x = {1.0, -1.0, 1.0};
  Matrix P = psi_k(x, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(P(i, j) == doctest::Approx(x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)] / 3.0));
}

TEST_CASE("jacobi eigendecomposition on a known matrix") {
  Matrix A(3, 3);
  A(0, 0) = 2.0; A(1, 1) = 2.0; A(0, 1) = A(1, 0) = 1.0; A(2, 2) = -5.0;
  Vector w;
  Matrix Q(1, 1);
  jacobi_eigen(A, w, Q);
  // eigenvalues 3, 1, -5 sorted by magnitude
  CHECK(w[0] == doctest::Approx(-5.0).epsilon(1e-10));
  CHECK(w[1] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(w[2] == doctest::Approx(1.0).epsilon(1e-10));
  // residual ||A q - w q||
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 3; ++i) {
      double av = 0.0;
      for (int j = 0; j < 3; ++j) av += A(i, j) * Q(j, c);
      CHECK(av == doctest::Approx(w[static_cast<std::size_t>(c)] * Q(i, c)).scale(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("almost-orthonormality: exact small-d enumeration stays under the bound") {
  RngStream rng(2);
  int d = 10, k = 2, D = 4;
  ShatterInstance inst = make_instance(d, k, D, rng.child(0));
  double exact = almost_orthonormality_exact(inst.points, k);
  double bound = (k + 2.0 * D + 2.0) / (k * (2.0 * d - k));
  CHECK(exact <= bound);
  CHECK(exact > 0.0);
  // Monte Carlo agrees with the exact value
  double se = 0.0;
  double mc = almost_orthonormality(inst.points, k, 20000, rng.child(1), &se);
  CHECK(std::abs(mc - exact) <= 4.0 * se);
  CHECK(almost_orthonormality({}, 1, 10, rng.child(2)) == 0.0);
}

TEST_CASE("single-point fit has margin exactly one") {
  RngStream rng(3);
  ShatterInstance inst = make_instance(16, 3, 1, rng.child(0));
  for (int label : {1, -1}) {
    FitResult fit = fit_quadratic_shatter(inst, {label}, 8.0);
    // unit-norm image: the Gram solution is the label times the image itself
    REQUIRE(fit.alpha.size() == 1);
    CHECK(fit.alpha[0] == doctest::Approx(label).epsilon(1e-12));
    CHECK(fit.margins[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.q.eval(inst.points[0]) == doctest::Approx(label).epsilon(1e-10));
  }
}

TEST_CASE("random instance fit satisfies margins and class constraints") {
  RngStream rng(4);
  int d = 64, k = 4, D = 15;
  ShatterInstance inst = make_instance(d, k, D, rng.child(0));
  std::vector<int> labels = random_labels(D, rng.child(1));
  FitResult fit = fit_quadratic_shatter(inst, labels, 8.0);
  REQUIRE(fit.feasible);
  for (double m : fit.margins) CHECK(m >= 1.0 - 1e-8);
  for (std::size_t i = 0; i < fit.q.U.size(); ++i) {
    CHECK(std::abs(fit.q.lambda[i]) <= 8.0 / std::sqrt(static_cast<double>(k)) + 1e-12);
    for (std::size_t j = 0; j < i; ++j)
      CHECK(std::abs(dot(fit.q.U[i], fit.q.U[j])) <= 1e-10);
    CHECK(dot(fit.q.U[i], fit.q.U[i]) == doctest::Approx(1.0).epsilon(1e-10));
    for (const auto& x : inst.points) CHECK(std::abs(dot(fit.q.U[i], x)) <= inst.L + 1e-9);
  }
  // duplicated point makes the Gram matrix singular
  ShatterInstance degenerate = inst;
  degenerate.points.push_back(inst.points[0]);
  std::vector<int> more = labels;
  more.push_back(labels[0]);
  FitResult bad = fit_quadratic_shatter(degenerate, more, 8.0);
  CHECK(!bad.feasible);
  CHECK(bad.certificate.find("singular") != std::string::npos);
}

TEST_CASE("verify_shattering margins and label flips") {
  RngStream rng(5);
  ShatterInstance inst = make_instance(64, 4, 15, rng.child(0));
  std::vector<int> labels = random_labels(15, rng.child(1));
  FitResult fit = fit_quadratic_shatter(inst, labels, 8.0);
  REQUIRE(fit.feasible);
  auto scaled = [&](const Vector& x) { return 2.0 * fit.q.eval(x); };
  ShatterVerdict v = verify_shattering(inst, labels, scaled);
  CHECK(v.pass);
  std::vector<int> flipped = labels;
  flipped[2] = -flipped[2];
  ShatterVerdict bad = verify_shattering(inst, flipped, scaled);
  CHECK(!bad.pass);
  CHECK(bad.margins[2] < 0.0);
}

TEST_CASE("relu realization concentrates around twice the quadratic") {
  RngStream rng(6);
  int d = 24, k = 3, D = 5;
  ShatterInstance inst = make_instance(d, k, D, rng.child(0));
  std::vector<int> labels = random_labels(D, rng.child(1));
  FitResult fit = fit_quadratic_shatter(inst, labels, 8.0);
  REQUIRE(fit.feasible);
  QuadKernel kernel;
  // zero coefficients give the zero function
  QuadraticFn zero = fit.q;
  for (auto& l : zero.lambda) l = 0.0;
  ReluRealization z = quad_to_relu_net(zero, inst, 16, kernel, rng.child(2));
  CHECK(z.forward(inst.points[0]) == 0.0);

  // mean over independent realizations approaches 2q pointwise
  const int reps = 400;
  for (int p = 0; p < D; ++p) {
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < reps; ++t) {
      ReluRealization net = quad_to_relu_net(fit.q, inst, 64, kernel,
                                             rng.child(3).child(static_cast<std::uint64_t>(p * reps + t)));
      double v = net.forward(inst.points[static_cast<std::size_t>(p)]);
      sum += v;
      sumsq += v * v;
    }
    double mean = sum / reps;
    double se = std::sqrt(std::max(0.0, sumsq / reps - mean * mean) / reps);
    CHECK(std::abs(mean - 2.0 * fit.q.eval(inst.points[static_cast<std::size_t>(p)])) <=
          4.0 * se + 1e-9);
  }
}

TEST_CASE("explicit network matches the factored forward pass") {
  RngStream rng(7);
  int d = 16, k = 2, D = 3;
  ShatterInstance inst = make_instance(d, k, D, rng.child(0));
  std::vector<int> labels = random_labels(D, rng.child(1));
  FitResult fit = fit_quadratic_shatter(inst, labels, 8.0);
  REQUIRE(fit.feasible);
  QuadKernel kernel;
  ReluRealization net = quad_to_relu_net(fit.q, inst, 8, kernel, rng.child(2));
  NetworkSpec spec = net.to_network_spec();
  CHECK(spec.dims[0] == d + 1);
  CHECK(spec.dims[1] == 8 * static_cast<int>(fit.q.U.size()));
  spec.validate();
  for (const auto& x : inst.points) {
    Vector ext(x);
    ext.push_back(1.0);  // bias coordinate
    Vector h = matvec(spec.layers[0], ext);
    for (auto& v : h) v = v > 0.0 ? v : 0.0;
    Vector out = matvec(spec.layers[1], h);
    CHECK(out[0] == doctest::Approx(net.forward(x)).epsilon(1e-9));
  }
  CHECK(net.hidden_spectral_norm() == doctest::Approx(std::sqrt(8.0) / inst.L).epsilon(1e-12));
  CHECK(net.output_weight_sq_norm() > 0.0);
}
