#include "adl/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adl/parallel.hpp"

namespace adl {

namespace {

std::vector<Vector> probe_directions(int dim, int num_directions, RngStream rng) {
  std::vector<Vector> dirs;
  dirs.reserve(static_cast<std::size_t>(num_directions));
  int nb = std::min(dim, num_directions);
  for (int i = 0; i < nb; ++i) {
    Vector u(static_cast<std::size_t>(dim), 0.0);
    u[static_cast<std::size_t>(i)] = 1.0;
    dirs.push_back(std::move(u));
  }
  for (int j = nb; j < num_directions; ++j) {
    RngStream s = rng.child(static_cast<std::uint64_t>(j));
    Vector u(static_cast<std::size_t>(dim));
    double nrm = 0.0;
    while (nrm == 0.0) {
      for (auto& v : u) v = s.gaussian();
      nrm = norm2(u);
    }
    for (auto& v : u) v /= nrm;
    dirs.push_back(std::move(u));
  }
  return dirs;
}

struct VerifyState {
  Vector sum, sumsq;          // per-coordinate, for mean and its SE
  std::vector<double> z2, z4; // per-direction sums of z^2, z^4
  bool init = false;
};

}  // namespace

VarianceReport verify_estimator(const EstimatorSampler& e, std::int64_t trials,
                                int num_directions, RngStream rng) {
  if (trials < 100) throw InvalidInput("verify_estimator: trials must be >= 100");
  if (num_directions < 1) throw InvalidInput("verify_estimator: need at least one direction");
  std::vector<Vector> dirs = probe_directions(e.dim, num_directions, rng.child(0));
  RngStream trial_root = rng.child(1);
  std::size_t nd = dirs.size();
  std::size_t dim = static_cast<std::size_t>(e.dim);

  auto init_state = [&](VerifyState& st) {
    st.sum.assign(dim, 0.0);
    st.sumsq.assign(dim, 0.0);
    st.z2.assign(nd, 0.0);
    st.z4.assign(nd, 0.0);
    st.init = true;
  };
  std::function<void(VerifyState&, std::int64_t)> accumulate =
      [&](VerifyState& st, std::int64_t i) {
        if (!st.init) init_state(st);
        Vector x = e.sample(trial_root.child(static_cast<std::uint64_t>(i)));
        if (x.size() != dim)
          throw ContractViolation("estimator emitted wrong dimension at trial " + std::to_string(i));
        if (!all_finite(x))
          throw ContractViolation("estimator emitted non-finite value at trial " + std::to_string(i));
        for (std::size_t c = 0; c < dim; ++c) {
          st.sum[c] += x[c];
          st.sumsq[c] += x[c] * x[c];
        }
        for (std::size_t j = 0; j < nd; ++j) {
          double z = 0.0;
          for (std::size_t c = 0; c < dim; ++c) z += dirs[j][c] * (x[c] - e.target[c]);
          double z2 = z * z;
          st.z2[j] += z2;
          st.z4[j] += z2 * z2;
        }
      };
  std::function<void(VerifyState&, const VerifyState&)> merge =
      [&](VerifyState& tot, const VerifyState& st) {
        if (!st.init) return;
        if (!tot.init) init_state(tot);
        for (std::size_t c = 0; c < dim; ++c) {
          tot.sum[c] += st.sum[c];
          tot.sumsq[c] += st.sumsq[c];
        }
        for (std::size_t j = 0; j < nd; ++j) {
          tot.z2[j] += st.z2[j];
          tot.z4[j] += st.z4[j];
        }
      };
  VerifyState total;
  chunked_reduce<VerifyState>(trials, 1024, accumulate, merge, total);
  if (!total.init) init_state(total);

  VarianceReport rep;
  rep.trials = trials;
  double t = static_cast<double>(trials);
  for (std::size_t c = 0; c < dim; ++c) {
    double mean = total.sum[c] / t;
    rep.mean_error_inf = std::max(rep.mean_error_inf, std::abs(mean - e.target[c]));
    double var = std::max(0.0, total.sumsq[c] / t - mean * mean);
    rep.mean_se = std::max(rep.mean_se, std::sqrt(var / t));
  }
  for (std::size_t j = 0; j < nd; ++j) {
    double v = total.z2[j] / t;  // E<u, X - target>^2
    if (v >= rep.worst_directional_var) {
      rep.worst_directional_var = v;
      rep.worst_direction = dirs[j];
      double var_of_z2 = std::max(0.0, total.z4[j] / t - v * v);
      rep.standard_error = std::sqrt(var_of_z2 / t);
    }
  }
  return rep;
}

EstimatorSampler mean_combine(const EstimatorSampler& e, int k) {
  if (k <= 0) throw InvalidInput("mean_combine: k must be positive");
  if (k == 1) return e;
  EstimatorSampler out;
  out.target = e.target;
  out.sigma = e.sigma / std::sqrt(static_cast<double>(k));
  out.dim = e.dim;
  out.expected_bits = e.expected_bits * k;
  auto base = e.sample;
  std::size_t dim = static_cast<std::size_t>(e.dim);
  out.sample = [base, k, dim](RngStream rng) {
    Vector acc(dim, 0.0);
    for (int j = 0; j < k; ++j) {
      Vector x = base(rng.child(static_cast<std::uint64_t>(j)));
      for (std::size_t c = 0; c < dim; ++c) acc[c] += x[c];
    }
    for (auto& v : acc) v /= static_cast<double>(k);
    return acc;
  };
  return out;
}

std::function<Vector(RngStream)> median_combine(const std::vector<EstimatorSampler>& estimators) {
  if (estimators.empty()) throw InvalidInput("median_combine: empty sequence");
  int dim = estimators[0].dim;
  for (const auto& e : estimators)
    if (e.dim != dim) throw InvalidInput("median_combine: dimension mismatch");
  auto copies = estimators;
  return [copies, dim](RngStream rng) {
    std::size_t n = copies.size();
    std::vector<Vector> draws(n);
    for (std::size_t i = 0; i < n; ++i)
      draws[i] = copies[i].sample(rng.child(static_cast<std::uint64_t>(i)));
    Vector med(static_cast<std::size_t>(dim));
    std::vector<double> col(n);
    for (std::size_t c = 0; c < med.size(); ++c) {
      for (std::size_t i = 0; i < n; ++i) col[i] = draws[i][c];
      std::sort(col.begin(), col.end());
      med[c] = (n % 2 == 1) ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);
    }
    return med;
  };
}

EstimatorSampler affine_map(const EstimatorSampler& e, const Matrix& A) {
  if (A.cols != e.dim) throw InvalidInput("affine_map: dimension mismatch");
  EstimatorSampler out;
  out.target = matvec(A, e.target);
  out.sigma = spectral_norm(A) * e.sigma;
  out.dim = A.rows;
  out.expected_bits = e.expected_bits;
  auto base = e.sample;
  out.sample = [base, A](RngStream rng) { return matvec(A, base(rng)); };
  return out;
}

EstimatorSampler product_combine(const std::vector<EstimatorSampler>& estimators) {
  if (estimators.empty()) throw InvalidInput("product_combine: empty sequence");
  int dim = estimators[0].dim;
  for (const auto& e : estimators)
    if (e.dim != dim) throw InvalidInput("product_combine: dimension mismatch");
  EstimatorSampler out;
  out.dim = dim;
  out.target.assign(static_cast<std::size_t>(dim), 1.0);
  double with = 1.0, without = 1.0;
  for (const auto& e : estimators) {
    double mx = norm_inf(e.target);
    with *= e.sigma * e.sigma + mx * mx;
    without *= mx * mx;
    out.expected_bits += e.expected_bits;
    for (std::size_t c = 0; c < out.target.size(); ++c) out.target[c] *= e.target[c];
  }
  out.sigma = std::sqrt(std::max(0.0, with - without));
  auto copies = estimators;
  out.sample = [copies, dim](RngStream rng) {
    Vector prod(static_cast<std::size_t>(dim), 1.0);
    for (std::size_t i = 0; i < copies.size(); ++i) {
      Vector x = copies[i].sample(rng.child(static_cast<std::uint64_t>(i)));
      for (std::size_t c = 0; c < prod.size(); ++c) prod[c] *= x[c];
    }
    return prod;
  };
  return out;
}

EstimatorSampler sum_combine(const EstimatorSampler& e1, const EstimatorSampler& e2) {
  if (e1.dim != e2.dim) throw InvalidInput("sum_combine: dimension mismatch");
  EstimatorSampler out;
  out.dim = e1.dim;
  out.sigma = e1.sigma + e2.sigma;
  out.expected_bits = e1.expected_bits + e2.expected_bits;
  out.target.resize(static_cast<std::size_t>(e1.dim));
  for (std::size_t c = 0; c < out.target.size(); ++c) out.target[c] = e1.target[c] + e2.target[c];
  auto s1 = e1.sample, s2 = e2.sample;
  out.sample = [s1, s2](RngStream rng) {
    Vector a = s1(rng.child(0));
    Vector b = s2(rng.child(1));
    for (std::size_t c = 0; c < a.size(); ++c) a[c] += b[c];
    return a;
  };
  return out;
}

EstimatorSampler constant_estimator(const Vector& x) {
  EstimatorSampler out;
  out.target = x;
  out.sigma = 0.0;
  out.dim = static_cast<int>(x.size());
  out.sample = [x](RngStream) { return x; };
  return out;
}

EstimatorSampler gaussian_estimator(const Vector& x, double sigma) {
  EstimatorSampler out;
  out.target = x;
  out.sigma = sigma;
  out.dim = static_cast<int>(x.size());
  out.sample = [x, sigma](RngStream rng) {
    Vector v(x.size());
    for (std::size_t c = 0; c < v.size(); ++c) v[c] = x[c] + sigma * rng.gaussian();
    return v;
  };
  return out;
}

}  // namespace adl
