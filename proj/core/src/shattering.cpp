#include "adl/shattering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adl/parallel.hpp"

namespace adl {

namespace {

void check_cube(const Vector& x) {
  for (double v : x)
    if (v != 1.0 && v != -1.0) throw InvalidInput("point is not in the sign cube");
}

double norm_factor(int d, int k) { return std::sqrt(static_cast<double>(k) * (2.0 * d - k)); }

}  // namespace

Matrix psi_k(const Vector& x, int k) {
  int d = static_cast<int>(x.size());
  if (k < 1 || k > d) throw InvalidInput("psi_k: k must be in [1, d]");
  check_cube(x);
  double s = 1.0 / norm_factor(d, k);
  Matrix M(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (std::min(i, j) < k)
        M(i, j) = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)] * s;
  return M;
}

double psi_inner(const Vector& x, const Vector& y, int k) {
  int d = static_cast<int>(x.size());
  if (y.size() != x.size()) throw InvalidInput("psi_inner: dimension mismatch");
  double S = 0.0, T = 0.0;
  for (int i = 0; i < d; ++i) {
    double z = x[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
    S += z;
    if (i >= k) T += z;
  }
  double nf = norm_factor(d, k);
  return (S * S - T * T) / (nf * nf);
}

ShatterInstance make_instance(int d, int k, int D, RngStream rng) {
  if (d < 1 || k < 1 || k > d || D < 1) throw InvalidInput("make_instance: bad parameters");
  ShatterInstance inst;
  inst.k = k;
  inst.L = std::sqrt(2.0 * std::log(20.0 * d * D));
  inst.points.reserve(static_cast<std::size_t>(D));
  for (int i = 0; i < D; ++i) {
    RngStream s = rng.child(static_cast<std::uint64_t>(i));
    Vector x(static_cast<std::size_t>(d));
    for (auto& v : x) v = s.bernoulli(0.5) ? 1.0 : -1.0;
    inst.points.push_back(std::move(x));
  }
  return inst;
}

double QuadraticFn::eval(const Vector& x) const {
  double q = 0.0;
  for (std::size_t i = 0; i < U.size(); ++i) {
    double p = dot(U[i], x);
    q += lambda[i] * p * p;
  }
  return q;
}

void jacobi_eigen(const Matrix& A, Vector& w, Matrix& Q) {
  int n = A.rows;
  if (n != A.cols) throw InvalidInput("jacobi_eigen: matrix must be square");
  if (n > 256) throw InvalidInput("jacobi_eigen: dimension cap is 256");
  Matrix a = A;
  Q = Matrix::identity(n);
  double scale = 0.0;
  for (double v : a.a) scale += v * v;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-24 * std::max(scale, 1e-300)) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int i = 0; i < n; ++i) {
          double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          double qip = Q(i, p), qiq = Q(i, q);
          Q(i, p) = c * qip - s * qiq;
          Q(i, q) = s * qip + c * qiq;
        }
      }
    }
  }
  w.resize(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = a(i, i);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return std::abs(w[static_cast<std::size_t>(i)]) > std::abs(w[static_cast<std::size_t>(j)]);
  });
  Vector ws(static_cast<std::size_t>(n));
  Matrix Qs(n, n);
  for (int c = 0; c < n; ++c) {
    ws[static_cast<std::size_t>(c)] = w[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])];
    for (int i = 0; i < n; ++i) Qs(i, c) = Q(i, order[static_cast<std::size_t>(c)]);
  }
  w = std::move(ws);
  Q = std::move(Qs);
}

namespace {

// Orthonormal-basis coefficients for span{psi_k(points)}: rows of C express
// basis vectors as combinations of the images.
std::vector<Vector> span_coefficients(const std::vector<Vector>& points, int k) {
  int D = static_cast<int>(points.size());
  Matrix G(std::max(D, 1), std::max(D, 1));
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) G(i, j) = psi_inner(points[static_cast<std::size_t>(i)],
                                                    points[static_cast<std::size_t>(j)], k);
  Vector mu;
  Matrix Q(1, 1);
  jacobi_eigen(G, mu, Q);
  std::vector<Vector> C;
  for (int b = 0; b < D; ++b) {
    double m = mu[static_cast<std::size_t>(b)];
    if (m <= 1e-10) continue;
    Vector c(static_cast<std::size_t>(D));
    double inv = 1.0 / std::sqrt(m);
    for (int i = 0; i < D; ++i) c[static_cast<std::size_t>(i)] = Q(i, b) * inv;
    C.push_back(std::move(c));
  }
  return C;
}

double projection_sq(const std::vector<Vector>& points, const std::vector<Vector>& C, int k,
                     const Vector& X) {
  std::size_t D = points.size();
  Vector ip(D);
  for (std::size_t i = 0; i < D; ++i) ip[i] = psi_inner(points[i], X, k);
  double total = 0.0;
  for (const auto& c : C) {
    double p = 0.0;
    for (std::size_t i = 0; i < D; ++i) p += c[i] * ip[i];
    total += p * p;
  }
  return total;
}

}  // namespace

double almost_orthonormality(const std::vector<Vector>& points, int k, std::int64_t trials,
                             RngStream rng, double* se) {
  if (points.empty()) {
    if (se) *se = 0.0;
    return 0.0;
  }
  int d = static_cast<int>(points[0].size());
  for (const auto& p : points) check_cube(p);
  auto C = span_coefficients(points, k);
  struct St {
    double sum = 0.0, sumsq = 0.0;
  };
  St total;
  std::function<void(St&, std::int64_t)> acc = [&](St& st, std::int64_t i) {
    RngStream s = rng.child(static_cast<std::uint64_t>(i));
    Vector X(static_cast<std::size_t>(d));
    for (auto& v : X) v = s.bernoulli(0.5) ? 1.0 : -1.0;
    double p = projection_sq(points, C, k, X);
    st.sum += p;
    st.sumsq += p * p;
  };
  std::function<void(St&, const St&)> merge = [](St& t, const St& s) {
    t.sum += s.sum;
    t.sumsq += s.sumsq;
  };
  chunked_reduce<St>(trials, 256, acc, merge, total);
  double mean = total.sum / static_cast<double>(trials);
  if (se) {
    double var = std::max(0.0, total.sumsq / static_cast<double>(trials) - mean * mean);
    *se = std::sqrt(var / static_cast<double>(trials));
  }
  return mean;
}

double almost_orthonormality_exact(const std::vector<Vector>& points, int k) {
  if (points.empty()) return 0.0;
  int d = static_cast<int>(points[0].size());
  if (d > 20) throw InvalidInput("exact enumeration requires d <= 20");
  auto C = span_coefficients(points, k);
  double sum = 0.0;
  std::int64_t count = std::int64_t(1) << d;
  Vector X(static_cast<std::size_t>(d));
  for (std::int64_t mask = 0; mask < count; ++mask) {
    for (int i = 0; i < d; ++i) X[static_cast<std::size_t>(i)] = (mask >> i) & 1 ? 1.0 : -1.0;
    sum += projection_sq(points, C, k, X);
  }
  return sum / static_cast<double>(count);
}

FitResult fit_quadratic_shatter(const ShatterInstance& inst, const std::vector<int>& labels,
                                double B) {
  FitResult res;
  int D = inst.D();
  int d = inst.d();
  int k = inst.k;
  if (static_cast<int>(labels.size()) != D) throw InvalidInput("labels length must equal D");
  for (int l : labels)
    if (l != 1 && l != -1) throw InvalidInput("labels must be +-1");
  for (const auto& p : inst.points) check_cube(p);

  Matrix G(D, D);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j)
      G(i, j) = psi_inner(inst.points[static_cast<std::size_t>(i)],
                          inst.points[static_cast<std::size_t>(j)], k);
  Vector mu;
  Matrix Q(1, 1);
  jacobi_eigen(G, mu, Q);
  for (int b = 0; b < D; ++b) {
    if (std::abs(mu[static_cast<std::size_t>(b)]) <= 1e-10) {
      std::string dir;
      for (int i = 0; i < D; ++i)
        dir += (i ? "," : "") + std::to_string(Q(i, b));
      res.certificate = "singular Gram matrix; null direction (" + dir + ")";
      return res;
    }
  }
  res.alpha.assign(static_cast<std::size_t>(D), 0.0);
  for (int b = 0; b < D; ++b) {
    double proj = 0.0;
    for (int i = 0; i < D; ++i) proj += Q(i, b) * labels[static_cast<std::size_t>(i)];
    proj /= mu[static_cast<std::size_t>(b)];
    for (int i = 0; i < D; ++i) res.alpha[static_cast<std::size_t>(i)] += proj * Q(i, b);
  }

  // V = sum alpha_i psi(x_i); q(x) = x^T V x / sqrt(k(2d-k))
  Matrix V(d, d);
  for (int i = 0; i < D; ++i) {
    Matrix P = psi_k(inst.points[static_cast<std::size_t>(i)], k);
    for (std::size_t e = 0; e < V.a.size(); ++e) V.a[e] += res.alpha[static_cast<std::size_t>(i)] * P.a[e];
  }
  Vector ev;
  Matrix U(1, 1);
  jacobi_eigen(V, ev, U);
  double nf = norm_factor(d, k);
  for (int c = 0; c < d; ++c) {
    double lt = ev[static_cast<std::size_t>(c)];
    if (std::abs(lt) <= 1e-10) break;  // sorted by magnitude
    Vector u(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) u[static_cast<std::size_t>(i)] = U(i, c);
    res.q.U.push_back(std::move(u));
    res.q.lambda.push_back(lt / nf);
  }
  res.margins.resize(static_cast<std::size_t>(D));
  for (int i = 0; i < D; ++i)
    res.margins[static_cast<std::size_t>(i)] =
        labels[static_cast<std::size_t>(i)] * res.q.eval(inst.points[static_cast<std::size_t>(i)]);

  // class-membership constraints; q and margins stay populated as diagnostics
  for (std::size_t c = 0; c < res.q.U.size(); ++c) {
    if (std::abs(res.q.lambda[c]) > B / std::sqrt(static_cast<double>(k))) {
      res.certificate = "eigenvalue " + std::to_string(res.q.lambda[c]) + " exceeds B/sqrt(k)";
      return res;
    }
    for (int j = 0; j < D; ++j) {
      if (std::abs(dot(res.q.U[c], inst.points[static_cast<std::size_t>(j)])) > inst.L) {
        res.certificate = "direction " + std::to_string(c) + " is too coherent with point " +
                          std::to_string(j);
        return res;
      }
    }
  }
  res.feasible = true;
  return res;
}

double ReluRealization::forward(const Vector& x) const {
  std::size_t kk = U.size();
  Vector s(kk);
  for (std::size_t i = 0; i < kk; ++i) s[i] = dot(U[i], x) / L;
  double f = 0.0;
  double scale = 2.0 * L * L / static_cast<double>(n_reps);
  for (int j = 0; j < n_reps; ++j) {
    for (std::size_t i = 0; i < kk; ++i) {
      double z = s[i] - a(j, static_cast<int>(i));
      if (z > 0.0) f += scale * lambda[i] * b(j, static_cast<int>(i)) * z;
    }
  }
  return f;
}

double ReluRealization::hidden_spectral_norm() const {
  return std::sqrt(static_cast<double>(n_reps)) / L;
}

double ReluRealization::output_weight_sq_norm() const {
  double s = 0.0;
  double scale = 2.0 * L * L / static_cast<double>(n_reps);
  for (int j = 0; j < n_reps; ++j)
    for (std::size_t i = 0; i < U.size(); ++i) {
      double w = scale * lambda[i] * b(j, static_cast<int>(i));
      s += w * w;
    }
  return s;
}

NetworkSpec ReluRealization::to_network_spec() const {
  int d = static_cast<int>(U.empty() ? 0 : U[0].size());
  int kk = static_cast<int>(U.size());
  NetworkSpec net;
  net.activation = ActKind::Relu;
  net.dims = {d + 1, n_reps * kk, 1};
  Matrix W1(n_reps * kk, d + 1);
  Matrix W2(1, n_reps * kk);
  double scale = 2.0 * L * L / static_cast<double>(n_reps);
  for (int j = 0; j < n_reps; ++j)
    for (int i = 0; i < kk; ++i) {
      int row = j * kk + i;
      for (int c = 0; c < d; ++c) W1(row, c) = U[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] / L;
      W1(row, d) = -a(j, i);  // bias rides on a constant-1 input coordinate
      W2(0, row) = scale * lambda[static_cast<std::size_t>(i)] * b(j, i);
    }
  net.r = spectral_norm(W1) * (1.0 + 1e-9);
  net.R = frobenius_norm(W1) * (1.0 + 1e-9);
  double r2 = std::max(spectral_norm(W2), frobenius_norm(W2)) * (1.0 + 1e-9);
  net.r = std::max(net.r, r2);
  net.R = std::max(net.R, r2);
  net.layers = {std::move(W1), std::move(W2)};
  return net;
}

ReluRealization quad_to_relu_net(const QuadraticFn& q, const ShatterInstance& inst, int n_reps,
                                 const QuadKernel& kernel, RngStream rng) {
  if (n_reps < 1) throw InvalidInput("n_reps must be positive");
  ReluRealization net;
  net.U = q.U;
  net.lambda = q.lambda;
  net.L = inst.L;
  net.n_reps = n_reps;
  int kk = static_cast<int>(q.U.size());
  net.a = Matrix(n_reps, std::max(kk, 1));
  net.b = Matrix(n_reps, std::max(kk, 1));
  for (int j = 0; j < n_reps; ++j) {
    RngStream row = rng.child(static_cast<std::uint64_t>(j));
    for (int i = 0; i < kk; ++i) {
      RngStream cell = row.child(static_cast<std::uint64_t>(i));
      auto [av, bv] = kernel.sample(cell);
      net.a(j, i) = av;
      net.b(j, i) = bv;
    }
  }
  return net;
}

ShatterVerdict verify_shattering(const ShatterInstance& inst, const std::vector<int>& labels,
                                 const std::function<double(const Vector&)>& f) {
  if (static_cast<int>(labels.size()) != inst.D())
    throw InvalidInput("labels length must equal D");
  ShatterVerdict v;
  v.pass = true;
  v.margins.resize(static_cast<std::size_t>(inst.D()));
  for (int i = 0; i < inst.D(); ++i) {
    double m = f(inst.points[static_cast<std::size_t>(i)]) * labels[static_cast<std::size_t>(i)];
    v.margins[static_cast<std::size_t>(i)] = m;
    if (m < 1.0) v.pass = false;
  }
  return v;
}

}  // namespace adl
