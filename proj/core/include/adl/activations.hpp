#pragma once

#include <string>
#include <vector>

#include "adl/numerics.hpp"
#include "adl/rng.hpp"

namespace adl {

enum class ActKind { Softplus, Sigmoid, Relu };

ActKind activation_from_name(const std::string& name);
std::string activation_name(ActKind kind);

double activation_eval(ActKind kind, double x);

// Taylor coefficients c_0..c_order of softplus/sigmoid around `center`, via the
// exact derivative recurrence in s = sigmoid(center): each derivative is a
// polynomial in s, advanced by P -> P' * s(1-s). Relu is rejected.
std::vector<double> taylor_coeffs(ActKind kind, double center, int order);

// n-th derivative value at `center` (n! * c_n), same recurrence.
double activation_derivative(ActKind kind, double center, int n);

// The shared derivative-growth constant: B = 1/(r* cos r*) with r* maximizing
// r cos r on (0, pi/2). Both softplus and sigmoid satisfy |f^(n)| <= n! B^n.
double strongly_bounded_B();

// C^1 bump f with f = x^2 on [-1,1], Hermite-cubic decay to 0 on +-[1,2]
// (p(1+t) = 4t^3 - 7t^2 + 2t + 1). Since f = f'' * relu (convolution),
// sampling a ~ |f''|/||f''||_1 and b = ||f''||_1 sign(f''(a)) gives
// E[b relu(x - a)] = x^2 on [-1,1].
class QuadKernel {
public:
  QuadKernel();

  double f(double x) const;
  double fpp(double x) const;          // second derivative (piecewise linear)
  double total_mass() const { return total_mass_; }  // ||f''||_1 = 49/3
  double C_bound() const { return total_mass_; }

  // (a, b) with a in [-2,2] by inverse-CDF over |f''|, |b| = total_mass.
  std::pair<double, double> sample(RngStream& rng) const;

private:
  struct Segment {
    double x0, x1;   // support interval
    double d0, d1;   // |f''| at the endpoints (linear in between)
    double mass;
  };
  std::vector<Segment> segments_;
  std::vector<double> cum_;  // cumulative masses, normalized to 1
  double total_mass_;
};

}  // namespace adl
