#include "adl/activations.hpp"

#include <cmath>

#include "adl/errors.hpp"

namespace adl {

ActKind activation_from_name(const std::string& name) {
  if (name == "softplus") return ActKind::Softplus;
  if (name == "sigmoid") return ActKind::Sigmoid;
  if (name == "relu") return ActKind::Relu;
  throw InvalidInput("unknown activation: " + name);
}

std::string activation_name(ActKind kind) {
  switch (kind) {
    case ActKind::Softplus: return "softplus";
    case ActKind::Sigmoid: return "sigmoid";
    case ActKind::Relu: return "relu";
  }
  return "";
}

static double softplus(double x) {
  // x + ln(1 + e^-x) for x > 0 avoids overflow
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

static double sigmoid(double x) {
  return x > 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

double activation_eval(ActKind kind, double x) {
  switch (kind) {
    case ActKind::Softplus: return softplus(x);
    case ActKind::Sigmoid: return sigmoid(x);
    case ActKind::Relu: return x > 0.0 ? x : 0.0;
  }
  return 0.0;
}

namespace {

using Poly = std::vector<double>;  // ascending powers of s

double poly_eval(const Poly& p, double s) {
  double v = 0.0;
  for (std::size_t i = p.size(); i-- > 0;) v = v * s + p[i];
  return v;
}

// P -> P'(s) * s(1-s): one derivative step of a function of s = sigmoid(x).
Poly poly_step(const Poly& p) {
  Poly d(p.size() > 1 ? p.size() - 1 : 1, 0.0);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<double>(i);
  Poly out(d.size() + 2, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    out[i + 1] += d[i];
    out[i + 2] -= d[i];
  }
  return out;
}

// Polynomials giving the n-th derivative of sigmoid as Q_n(s), built once up
// to the supported maximum order.
const std::vector<Poly>& sigmoid_derivative_polys() {
  static const std::vector<Poly> cache = [] {
    std::vector<Poly> q;
    q.reserve(65);
    q.push_back({0.0, 1.0});  // s itself
    for (int n = 1; n <= 64; ++n) q.push_back(poly_step(q.back()));
    return q;
  }();
  return cache;
}

}  // namespace

std::vector<double> taylor_coeffs(ActKind kind, double center, int order) {
  if (kind == ActKind::Relu) throw InvalidInput("taylor_coeffs: relu has no Taylor expansion");
  if (order < 0 || order > 64) throw InvalidInput("taylor_coeffs: order must be in [0, 64]");
  double s = sigmoid(center);
  const auto& q = sigmoid_derivative_polys();
  std::vector<double> c(static_cast<std::size_t>(order) + 1);
  if (kind == ActKind::Sigmoid) {
    double fact = 1.0;
    for (int n = 0; n <= order; ++n) {
      if (n > 0) fact *= n;
      c[static_cast<std::size_t>(n)] = poly_eval(q[static_cast<std::size_t>(n)], s) / fact;
    }
  } else {
    c[0] = softplus(center);
    double fact = 1.0;
    for (int n = 1; n <= order; ++n) {
      fact *= n;
      c[static_cast<std::size_t>(n)] = poly_eval(q[static_cast<std::size_t>(n - 1)], s) / fact;
    }
  }
  return c;
}

double activation_derivative(ActKind kind, double center, int n) {
  if (kind == ActKind::Relu) throw InvalidInput("activation_derivative: relu unsupported");
  if (n < 0 || n > 64) throw InvalidInput("activation_derivative: n must be in [0, 64]");
  double s = sigmoid(center);
  const auto& q = sigmoid_derivative_polys();
  if (kind == ActKind::Sigmoid) return poly_eval(q[static_cast<std::size_t>(n)], s);
  if (n == 0) return softplus(center);
  return poly_eval(q[static_cast<std::size_t>(n - 1)], s);
}

double strongly_bounded_B() {
  // maximize g(r) = r cos r on (0, pi/2); unimodal there
  double lo = 0.0, hi = 1.5707963267948966;
  for (int it = 0; it < 200; ++it) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (m1 * std::cos(m1) < m2 * std::cos(m2)) lo = m1; else hi = m2;
  }
  double r = 0.5 * (lo + hi);
  return 1.0 / (r * std::cos(r));
}

QuadKernel::QuadKernel() {
  // |f''|: two linear wings on each side (zero crossing at |x| = 19/12) and
  // the constant-2 middle where f = x^2.
  const double z = 19.0 / 12.0;
  segments_ = {
      {-2.0, -z, 10.0, 0.0, 25.0 / 12.0},
      {-z, -1.0, 0.0, 14.0, 49.0 / 12.0},
      {-1.0, 1.0, 2.0, 2.0, 4.0},
      {1.0, z, 14.0, 0.0, 49.0 / 12.0},
      {z, 2.0, 0.0, 10.0, 25.0 / 12.0},
  };
  total_mass_ = 0.0;
  for (const auto& seg : segments_) total_mass_ += seg.mass;
  cum_.resize(segments_.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    acc += segments_[i].mass / total_mass_;
    cum_[i] = acc;
  }
  cum_.back() = 1.0;
}

double QuadKernel::f(double x) const {
  double ax = std::abs(x);
  if (ax <= 1.0) return x * x;
  if (ax >= 2.0) return 0.0;
  double t = ax - 1.0;
  return ((4.0 * t - 7.0) * t + 2.0) * t + 1.0;
}

double QuadKernel::fpp(double x) const {
  double ax = std::abs(x);
  if (ax < 1.0) return 2.0;
  if (ax > 2.0) return 0.0;
  return 24.0 * (ax - 1.0) - 14.0;
}

std::pair<double, double> QuadKernel::sample(RngStream& rng) const {
  double u = rng.uniform();
  std::size_t i = 0;
  while (i + 1 < cum_.size() && u > cum_[i]) ++i;
  const Segment& seg = segments_[i];
  double prev = i > 0 ? cum_[i - 1] : 0.0;
  double target = (u - prev) * total_mass_;  // mass to cover inside the segment
  if (target < 0.0) target = 0.0;
  if (target > seg.mass) target = seg.mass;
  double len = seg.x1 - seg.x0;
  double slope = (seg.d1 - seg.d0) / len;
  // solve d0*s + slope*s^2/2 = target for s in [0, len] (stable root form)
  double disc = seg.d0 * seg.d0 + 2.0 * slope * target;
  if (disc < 0.0) disc = 0.0;
  double denom = seg.d0 + std::sqrt(disc);
  double s = denom > 0.0 ? 2.0 * target / denom : 0.0;
  if (s > len) s = len;
  double a = seg.x0 + s;
  double b = total_mass_ * (fpp(a) >= 0.0 ? 1.0 : -1.0);
  return {a, b};
}

}  // namespace adl
