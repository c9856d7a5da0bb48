#pragma once

#include <functional>
#include <vector>

#include "adl/numerics.hpp"
#include "adl/rng.hpp"

namespace adl {

// A randomized vector sampler with its claims attached: E[sample] = target and
// Var<u, sample> <= sigma^2 for every unit u. Claims are metadata only; they
// are checked by verify_estimator, never assumed.
struct EstimatorSampler {
  std::function<Vector(RngStream)> sample;
  Vector target;
  double sigma = 0.0;
  int dim = 0;
  double expected_bits = 0.0;
};

struct VarianceReport {
  std::int64_t trials = 0;
  double mean_error_inf = 0.0;   // ||empirical mean - target||_inf
  double mean_se = 0.0;          // worst per-coordinate SE of the mean
  double worst_directional_var = 0.0;
  Vector worst_direction;
  double standard_error = 0.0;   // MC standard error of the worst variance
};

// Empirical check of the (target, sigma) claim: draws `trials` samples on
// derived per-trial streams and evaluates E<u, X - target>^2 over a probe set
// of num_directions unit vectors (canonical basis first, then seeded random
// directions). Deterministic for a given rng regardless of thread count.
VarianceReport verify_estimator(const EstimatorSampler& e, std::int64_t trials,
                                int num_directions, RngStream rng);

// Average of k independent draws: sigma -> sigma/sqrt(k), bits -> k*bits.
EstimatorSampler mean_combine(const EstimatorSampler& e, int k);

// Coordinatewise median of one draw from each sampler. Tail bound:
// Pr(|med - mu| > k*sigma) < (2/k)^n for n independent sigma-estimators.
std::function<Vector(RngStream)> median_combine(const std::vector<EstimatorSampler>& estimators);

// x -> A x: target A*target, sigma ||A|| * sigma.
EstimatorSampler affine_map(const EstimatorSampler& e, const Matrix& A);

// Coordinatewise product of independent draws;
// sigma'^2 = prod(sigma_i^2 + ||x_i||_inf^2) - prod ||x_i||_inf^2.
EstimatorSampler product_combine(const std::vector<EstimatorSampler>& estimators);

// Coordinatewise sum of independent draws; sigma = sigma1 + sigma2.
EstimatorSampler sum_combine(const EstimatorSampler& e1, const EstimatorSampler& e2);

// Deterministic sampler X == x with sigma = 0.
EstimatorSampler constant_estimator(const Vector& x);

// Mean x, covariance sigma^2 I; the canonical test sampler.
EstimatorSampler gaussian_estimator(const Vector& x, double sigma);

}  // namespace adl
