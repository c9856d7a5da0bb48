#include <benchmark/benchmark.h>

#include <cmath>

#include "adl/activations.hpp"
#include "adl/codec.hpp"
#include "adl/compressor.hpp"
#include "adl/rng.hpp"
#include "adl/sketch.hpp"

using namespace adl;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  Matrix W(rows, cols);
  RngStream rng(seed);
  for (auto& v : W.a) v = rng.gaussian();
  return W;
}

NetworkSpec bench_net(int t, int d) {
  NetworkSpec net;
  net.r = 1.0;
  net.R = 2.0;
  for (int i = 0; i <= t; ++i) net.dims.push_back(d);
  for (int l = 0; l < t; ++l) {
    Matrix W = random_matrix(d, d, 100 + static_cast<std::uint64_t>(l));
    double scale = std::min(0.9 / spectral_norm(W), 1.8 / frobenius_norm(W));
    for (auto& v : W.a) v *= scale;
    net.layers.push_back(std::move(W));
  }
  return net;
}

SampleSet bench_samples(int m, int d) {
  SampleSet A;
  A.input_radius = 1.0;
  RngStream rng(7);
  for (int i = 0; i < m; ++i) {
    Vector x(static_cast<std::size_t>(d));
    double n2 = 0.0;
    for (auto& v : x) { v = rng.gaussian(); n2 += v * v; }
    for (auto& v : x) v *= 0.9 / std::sqrt(n2);
    A.points.push_back(std::move(x));
  }
  return A;
}

void BM_SketchDraw(benchmark::State& state) {
  int d = static_cast<int>(state.range(0));
  Matrix W = random_matrix(d, d, 1);
  SketchDist dist(W);
  RngStream rng(2);
  for (auto _ : state) {
    RngStream s = rng.child(static_cast<std::uint64_t>(state.iterations()));
    benchmark::DoNotOptimize(dist.draw(s));
  }
}
BENCHMARK(BM_SketchDraw)->Arg(16)->Arg(64)->Arg(256);

void BM_SketchCodecRoundTrip(benchmark::State& state) {
  Matrix W = random_matrix(16, 16, 3);
  double M = frobenius_norm(W);
  RngStream rng(4);
  KSketch s = ksketch(W, 64, rng);
  for (auto _ : state) {
    Bracketed code = encode_sketch(s, M);
    benchmark::DoNotOptimize(decode_sketch(code, 16, 16, 64, M));
  }
}
BENCHMARK(BM_SketchCodecRoundTrip);

void BM_TaylorCoeffs(benchmark::State& state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(taylor_coeffs(ActKind::Softplus, 0.37, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_TaylorCoeffs)->Arg(12)->Arg(32)->Arg(64);

void BM_NetworkDraw(benchmark::State& state) {
  int t = static_cast<int>(state.range(0));
  int d = static_cast<int>(state.range(1));
  NetworkSpec net = bench_net(t, d);
  SampleSet A = bench_samples(8, d);
  NetworkCompressor comp(net, A);
  RngStream rng(9);
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(comp.draw(rng.child(i++)));
}
BENCHMARK(BM_NetworkDraw)->Args({1, 16})->Args({2, 8})->Args({2, 16});

}  // namespace

BENCHMARK_MAIN();
