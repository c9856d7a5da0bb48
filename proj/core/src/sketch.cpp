#include "adl/sketch.hpp"

#include <algorithm>
#include <cmath>

namespace adl {

SketchDist::SketchDist(const double* w, std::int64_t d, int rows, int cols)
    : w_(w, w + d), rows_(rows), cols_(cols) {
  for (std::int64_t i = 0; i < d; ++i)
    if (!std::isfinite(w[i])) throw InvalidInput("sketch: non-finite input");
  double norm_sq = 0.0;
  for (std::int64_t i = 0; i < d; ++i) norm_sq += w[i] * w[i];
  cdf_.resize(static_cast<std::size_t>(d));
  double acc = 0.0;
  double dd = static_cast<double>(d);
  for (std::int64_t i = 0; i < d; ++i) {
    double p = (norm_sq > 0.0) ? (w[i] * w[i] / (2.0 * norm_sq) + 1.0 / (2.0 * dd)) : 1.0 / dd;
    acc += p;
    cdf_[static_cast<std::size_t>(i)] = acc;
  }
  cdf_.back() = 1.0;  // guard against rounding
}

SketchTerm SketchDist::draw(RngStream& rng) const {
  double u = rng.uniform();
  std::size_t i = static_cast<std::size_t>(
      std::lower_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  if (i >= cdf_.size()) i = cdf_.size() - 1;
  double p = cdf_[i] - (i > 0 ? cdf_[i - 1] : 0.0);
  double ratio = (p > 0.0) ? w_[i] / p : 0.0;
  double fl = std::floor(ratio);
  double frac = ratio - fl;
  std::int64_t payload = static_cast<std::int64_t>(fl) + (rng.bernoulli(frac) ? 1 : 0);
  return SketchTerm{static_cast<std::int64_t>(i), payload, rows_, cols_};
}

SketchTerm sketch_vector(const Vector& w, RngStream& rng) {
  SketchDist dist(w.data(), static_cast<std::int64_t>(w.size()), static_cast<int>(w.size()), 1);
  return dist.draw(rng);
}

SketchTerm sketch_matrix(const Matrix& W, RngStream& rng) {
  SketchDist dist(W);
  return dist.draw(rng);
}

KSketch ksketch(const Matrix& W, int k, RngStream rng) {
  if (k <= 0) throw InvalidInput("ksketch: k must be positive");
  SketchDist dist(W);
  KSketch s;
  s.rows = W.rows;
  s.cols = W.cols;
  s.terms.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    RngStream child = rng.child(static_cast<std::uint64_t>(j));
    s.terms.push_back(dist.draw(child));
  }
  return s;
}

Vector apply_ksketch(const KSketch& s, const Vector& x) {
  if (static_cast<int>(x.size()) != s.cols) throw InvalidInput("apply_ksketch: dimension mismatch");
  Vector y(static_cast<std::size_t>(s.rows), 0.0);
  double inv_k = 1.0 / static_cast<double>(s.k());
  for (const auto& t : s.terms) {
    std::int64_t a = t.index / s.cols;
    std::int64_t b = t.index % s.cols;
    y[static_cast<std::size_t>(a)] += inv_k * static_cast<double>(t.payload) * x[static_cast<std::size_t>(b)];
  }
  return y;
}

Matrix ksketch_dense(const KSketch& s) {
  Matrix M(s.rows, s.cols);
  double inv_k = 1.0 / static_cast<double>(s.k());
  for (const auto& t : s.terms) M.a[static_cast<std::size_t>(t.index)] += inv_k * static_cast<double>(t.payload);
  return M;
}

std::int64_t sketch_payload_cap(std::int64_t d, double M_bound) {
  return static_cast<std::int64_t>(std::ceil(static_cast<double>(d) * M_bound));
}

Bracketed encode_sketch(const KSketch& s, double M_bound) {
  std::int64_t d = static_cast<std::int64_t>(s.rows) * s.cols;
  std::int64_t cap = sketch_payload_cap(d, M_bound);
  std::vector<Bracketed> parts;
  parts.reserve(s.terms.size() * 2);
  for (const auto& t : s.terms) {
    if (t.payload < -cap || t.payload > cap + 1)
      throw ContractViolation("encode_sketch: payload outside theoretical range");
    parts.push_back(encode_bounded_int(t.index, 0, d - 1));
    parts.push_back(encode_bounded_int(t.payload, -cap, cap + 1));
  }
  return Bracketed::concat(parts);
}

KSketch decode_sketch(const Bracketed& code, int rows, int cols, int k, double M_bound) {
  std::int64_t d = static_cast<std::int64_t>(rows) * cols;
  std::int64_t cap = sketch_payload_cap(d, M_bound);
  int wi = bounded_int_width(0, d - 1);
  int wp = bounded_int_width(-cap, cap + 1);
  std::vector<bool> bits = code.leaf_bits();
  if (static_cast<std::int64_t>(bits.size()) != static_cast<std::int64_t>(k) * (wi + wp))
    throw ParseError("decode_sketch: bit count mismatch", 0);
  KSketch s;
  s.rows = rows;
  s.cols = cols;
  s.terms.reserve(static_cast<std::size_t>(k));
  std::size_t pos = 0;
  auto take = [&](int w) {
    std::uint64_t u = 0;
    for (int i = 0; i < w; ++i) u = (u << 1) | (bits[pos++] ? 1u : 0u);
    return u;
  };
  for (int j = 0; j < k; ++j) {
    std::int64_t idx = static_cast<std::int64_t>(take(wi));
    std::int64_t payload = static_cast<std::int64_t>(take(wp)) - cap;
    if (idx >= d) throw ParseError("decode_sketch: index out of range", pos);
    s.terms.push_back(SketchTerm{idx, payload, rows, cols});
  }
  return s;
}

}  // namespace adl
