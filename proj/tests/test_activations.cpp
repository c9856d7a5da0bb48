#include <doctest.h>

#include <cmath>

#include "adl/activations.hpp"

using namespace adl;

TEST_CASE("softplus series at zero") {
  auto c = taylor_coeffs(ActKind::Softplus, 0.0, 4);
  CHECK(c[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(c[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c[2] == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(c[3] == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(c[4] == doctest::Approx(-1.0 / 192.0).epsilon(1e-12));
}

TEST_CASE("derivatives match central finite differences") {
  const double h = 1e-4;
  for (ActKind kind : {ActKind::Softplus, ActKind::Sigmoid}) {
    for (double a : {-2.0, -0.3, 0.0, 1.7}) {
      double fd1 = (activation_eval(kind, a + h) - activation_eval(kind, a - h)) / (2.0 * h);
      CHECK(activation_derivative(kind, a, 1) == doctest::Approx(fd1).epsilon(1e-6));
      double fd2 = (activation_eval(kind, a + h) - 2.0 * activation_eval(kind, a) +
                    activation_eval(kind, a - h)) / (h * h);
      CHECK(activation_derivative(kind, a, 2) == doctest::Approx(fd2).epsilon(1e-4));
    }
  }
}

TEST_CASE("taylor series converges to the function near the center") {
  for (ActKind kind : {ActKind::Softplus, ActKind::Sigmoid}) {
    double center = 0.4;
    auto c = taylor_coeffs(kind, center, 30);
    for (double dx : {-0.3, 0.1, 0.25}) {
      double sum = 0.0, p = 1.0;
      for (std::size_t n = 0; n < c.size(); ++n) {
        sum += c[n] * p;
        p *= dx;
      }
      CHECK(sum == doctest::Approx(activation_eval(kind, center + dx)).epsilon(1e-12));
    }
  }
}

TEST_CASE("relu has no series") {
  CHECK_THROWS_AS(taylor_coeffs(ActKind::Relu, 0.0, 3), InvalidInput);
}

TEST_CASE("derivative growth constant") {
  double B = strongly_bounded_B();
  CHECK(B == doctest::Approx(1.7822251402031333).epsilon(1e-9));
  for (ActKind kind : {ActKind::Softplus, ActKind::Sigmoid}) {
    for (double a = -10.0; a <= 10.0 + 1e-9; a += 0.5) {
      double fact = 1.0, Bn = 1.0;
      for (int n = 1; n <= 10; ++n) {
        fact *= n;
        Bn *= 1.7822;
        CHECK(std::abs(activation_derivative(kind, a, n)) <= fact * Bn * (1.0 + 1e-9));
      }
    }
  }
}

TEST_CASE("activation names round-trip") {
  CHECK(activation_from_name("softplus") == ActKind::Softplus);
  CHECK(activation_name(ActKind::Sigmoid) == "sigmoid");
  CHECK_THROWS_AS(activation_from_name("tanh"), InvalidInput);
}

TEST_CASE("quadratic kernel shape") {
  QuadKernel k;
  CHECK(k.total_mass() == doctest::Approx(49.0 / 3.0).epsilon(1e-14));
  CHECK(k.f(0.5) == doctest::Approx(0.25));
  CHECK(k.f(1.0) == doctest::Approx(1.0));
  CHECK(k.f(1.5) == doctest::Approx(0.75));
  CHECK(k.f(2.0) == doctest::Approx(0.0));
  CHECK(k.f(2.5) == doctest::Approx(0.0));
  CHECK(k.fpp(0.0) == doctest::Approx(2.0));
  CHECK(k.fpp(19.0 / 12.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(k.fpp(-19.0 / 12.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("kernel identity E[b relu(x-a)] = x^2 on [-1,1]") {
  QuadKernel k;
  RngStream rng(21);
  for (double x : {-1.0, -0.4, 0.0, 0.7, 1.0}) {
    const int T = 200000;
    double sum = 0.0, sumsq = 0.0;
    RngStream base = rng.child(static_cast<std::uint64_t>(std::llround((x + 1.0) * 10.0)));
    for (int t = 0; t < T; ++t) {
      RngStream s = base.child(static_cast<std::uint64_t>(t));
      auto [a, b] = k.sample(s);
      double v = x - a > 0.0 ? b * (x - a) : 0.0;
      sum += v;
      sumsq += v * v;
    }
    double mean = sum / T;
    double se = std::sqrt(std::max(0.0, sumsq / T - mean * mean) / T);
    CHECK(std::abs(mean - x * x) <= 3.0 * se + 1e-9);
  }
}
