#include <doctest.h>

#include <cmath>

#include "adl/sketch.hpp"

using namespace adl;

namespace {

// Expectation of one sketch draw by direct enumeration of (index, rounding)
// outcomes under the index-probability rule; independent of the sampler.
Vector expectation_enum(const Vector& w) {
  std::size_t d = w.size();
  double n2 = 0.0;
  for (double v : w) n2 += v * v;
  Vector e(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double p = n2 == 0.0 ? 1.0 / static_cast<double>(d)
                         : w[i] * w[i] / (2.0 * n2) + 1.0 / (2.0 * static_cast<double>(d));
    double t = w[i] / p;
    double fl = std::floor(t);
    double frac = t - fl;
    e[i] += p * (fl * (1.0 - frac) + (fl + 1.0) * frac);
  }
  return e;
}

}  // namespace

TEST_CASE("enumerated expectation reproduces the input on a small grid") {
  const double vals[3] = {-1.5, 0.0, 0.8};
  for (int d = 1; d <= 4; ++d) {
    int total = 1;
    for (int i = 0; i < d; ++i) total *= 3;
    for (int mask = 0; mask < total; ++mask) {
      Vector w(static_cast<std::size_t>(d));
      int m = mask;
      for (int i = 0; i < d; ++i) {
        w[static_cast<std::size_t>(i)] = vals[m % 3];
        m /= 3;
      }
      Vector e = expectation_enum(w);
      for (int i = 0; i < d; ++i)
        CHECK(std::abs(e[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(i)]) <= 1e-10);
    }
  }
}

TEST_CASE("empirical mean of sketch draws approaches the vector") {
  Vector w = {0.3, -1.2, 2.5};
  SketchDist dist(w.data(), 3, 3, 1);
  RngStream rng(11);
  const int T = 200000;
  Vector sum(3, 0.0);
  for (int t = 0; t < T; ++t) {
    RngStream s = rng.child(static_cast<std::uint64_t>(t));
    SketchTerm term = dist.draw(s);
    sum[static_cast<std::size_t>(term.index)] += static_cast<double>(term.payload);
  }
  for (int i = 0; i < 3; ++i)
    CHECK(sum[static_cast<std::size_t>(i)] / T ==
          doctest::Approx(w[static_cast<std::size_t>(i)]).epsilon(0.05));
}

TEST_CASE("zero vector degenerates to uniform index, zero payload") {
  Vector w = {0.0, 0.0};
  SketchDist dist(w.data(), 2, 2, 1);
  RngStream rng(3);
  for (int t = 0; t < 100; ++t) {
    RngStream s = rng.child(static_cast<std::uint64_t>(t));
    SketchTerm term = dist.draw(s);
    CHECK(term.payload == 0);
  }
}

TEST_CASE("apply_ksketch matches the dense reconstruction") {
  Matrix W(3, 2);
  W(0, 0) = 1.0; W(0, 1) = -2.0; W(1, 0) = 0.5; W(2, 1) = 3.0;
  RngStream rng(5);
  KSketch s = ksketch(W, 7, rng);
  CHECK(s.k() == 7);
  Vector x = {0.4, -1.1};
  Vector via_terms = apply_ksketch(s, x);
  Vector via_dense = matvec(ksketch_dense(s), x);
  for (int i = 0; i < 3; ++i)
    CHECK(via_terms[static_cast<std::size_t>(i)] ==
          doctest::Approx(via_dense[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("payload cap and code round-trip") {
  CHECK(sketch_payload_cap(6, 2.0) == 12);
  Matrix W(2, 3);
  W(0, 0) = 0.9; W(1, 2) = -0.7; W(0, 1) = 0.3;
  double M = frobenius_norm(W) + 0.1;
  RngStream rng(17);
  KSketch s = ksketch(W, 5, rng);
  Bracketed code = encode_sketch(s, M);
  KSketch back = decode_sketch(code, 2, 3, 5, M);
  REQUIRE(back.k() == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(back.terms[static_cast<std::size_t>(i)].index == s.terms[static_cast<std::size_t>(i)].index);
    CHECK(back.terms[static_cast<std::size_t>(i)].payload == s.terms[static_cast<std::size_t>(i)].payload);
  }
  // fixed-width layout: k * (index width + payload width) leaves
  std::int64_t cap = sketch_payload_cap(6, M);
  std::int64_t per = bounded_int_width(0, 5) + bounded_int_width(-cap, cap + 1);
  CHECK(code.len() == 5 * per);
}
