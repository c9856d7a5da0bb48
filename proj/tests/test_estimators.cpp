#include <doctest.h>

#include <cmath>

#include "adl/estimators.hpp"
#include "adl/parallel.hpp"

using namespace adl;

TEST_CASE("gaussian estimator claim verifies") {
  EstimatorSampler g = gaussian_estimator({1.0, -2.0}, 0.5);
  VarianceReport r = verify_estimator(g, 50000, 16, RngStream(1));
  CHECK(r.mean_error_inf <= 4.0 * r.mean_se);
  CHECK(r.worst_directional_var <= 0.25 + 4.0 * r.standard_error);
  CHECK(r.worst_directional_var >= 0.25 - 4.0 * r.standard_error);
}

TEST_CASE("verify_estimator flags a lying claim") {
  EstimatorSampler g = gaussian_estimator({0.0}, 1.0);
  g.sigma = 0.1;  // false claim
  VarianceReport r = verify_estimator(g, 20000, 4, RngStream(2));
  CHECK(r.worst_directional_var > g.sigma * g.sigma + 4.0 * r.standard_error);
}

TEST_CASE("mean_combine shrinks variance as 1/k") {
  EstimatorSampler g = gaussian_estimator({3.0}, 1.0);
  EstimatorSampler m = mean_combine(g, 16);
  CHECK(m.sigma == doctest::Approx(0.25));
  VarianceReport r = verify_estimator(m, 30000, 1, RngStream(3));
  CHECK(r.worst_directional_var <= 0.0625 + 4.0 * r.standard_error);
  CHECK(r.worst_directional_var >= 0.0625 - 4.0 * r.standard_error);
}

TEST_CASE("affine_map scales sigma by the spectral norm") {
  EstimatorSampler g = gaussian_estimator({1.0, 1.0}, 0.3);
  Matrix A(2, 2);
  A(0, 0) = 3.0; A(0, 1) = 4.0;  // spectral norm 5
  EstimatorSampler a = affine_map(g, A);
  CHECK(a.sigma == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(a.target[0] == doctest::Approx(7.0));
  VarianceReport r = verify_estimator(a, 30000, 8, RngStream(4));
  CHECK(r.worst_directional_var <= a.sigma * a.sigma + 4.0 * r.standard_error);
}

TEST_CASE("sum_combine adds sigmas") {
  EstimatorSampler s =
      sum_combine(gaussian_estimator({1.0}, 0.5), gaussian_estimator({2.0}, 0.25));
  CHECK(s.sigma == doctest::Approx(0.75));
  CHECK(s.target[0] == doctest::Approx(3.0));
  VarianceReport r = verify_estimator(s, 30000, 1, RngStream(5));
  CHECK(r.worst_directional_var <= s.sigma * s.sigma + 4.0 * r.standard_error);
}

TEST_CASE("product variance formula: three unit factors give 7") {
  std::vector<EstimatorSampler> parts(3, gaussian_estimator({1.0}, 1.0));
  EstimatorSampler p = product_combine(parts);
  CHECK(p.sigma * p.sigma == doctest::Approx(7.0));
  RngStream rng(6);
  const int T = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int t = 0; t < T; ++t) {
    double v = p.sample(rng.child(static_cast<std::uint64_t>(t)))[0];
    sum += v;
    sumsq += v * v;
  }
  double mean = sum / T;
  double var = sumsq / T - mean * mean;
  CHECK(var == doctest::Approx(7.0).epsilon(0.15));
}

TEST_CASE("median tail bound") {
  std::vector<EstimatorSampler> parts(5, gaussian_estimator({0.0}, 1.0));
  auto med = median_combine(parts);
  RngStream rng(7);
  const int T = 50000;
  int exceed = 0;
  for (int t = 0; t < T; ++t)
    if (std::abs(med(rng.child(static_cast<std::uint64_t>(t)))[0]) > 4.0) ++exceed;
  double p = static_cast<double>(exceed) / T;
  double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / T) / T);
  CHECK(p <= 1.0 / 32.0 + 3.0 * se);
}

TEST_CASE("constant estimator has zero variance") {
  EstimatorSampler c = constant_estimator({4.0, 5.0});
  VarianceReport r = verify_estimator(c, 200, 4, RngStream(8));
  CHECK(r.mean_error_inf == 0.0);
  CHECK(r.worst_directional_var == 0.0);
}

TEST_CASE("determinism across thread counts") {
  EstimatorSampler g = gaussian_estimator({1.0, 2.0, 3.0}, 0.7);
  set_thread_override(1);
  VarianceReport r1 = verify_estimator(g, 20000, 8, RngStream(9));
  set_thread_override(8);
  VarianceReport r8 = verify_estimator(g, 20000, 8, RngStream(9));
  set_thread_override(0);
  CHECK(r1.worst_directional_var == r8.worst_directional_var);
  CHECK(r1.mean_error_inf == r8.mean_error_inf);
}
