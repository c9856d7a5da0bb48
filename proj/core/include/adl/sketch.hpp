#pragma once

#include <cstdint>
#include <vector>

#include "adl/codec.hpp"
#include "adl/numerics.hpp"
#include "adl/rng.hpp"

namespace adl {

// One rank-one sketch term: flat basis index and the integer payload
// floor(w_i / p_i) + b with b ~ Bernoulli(frac(w_i / p_i)).
struct SketchTerm {
  std::int64_t index = 0;
  std::int64_t payload = 0;
  int rows = 0;
  int cols = 0;  // cols == 1 for vector sketches
};

// Average of k independent sketch terms; reconstruction is
// (1/k) * sum payload_j * e_{index_j}.
struct KSketch {
  std::vector<SketchTerm> terms;
  int rows = 0;
  int cols = 0;
  int k() const { return static_cast<int>(terms.size()); }
};

// Precomputed index distribution p_i = w_i^2 / (2 ||w||^2) + 1/(2d) for
// repeated draws from the same vector/matrix (inverse-CDF, O(log d) per draw).
// For w = 0 the rule degenerates to p_i = 1/d and payload 0.
class SketchDist {
public:
  SketchDist(const double* w, std::int64_t d, int rows, int cols);
  explicit SketchDist(const Matrix& W) : SketchDist(W.a.data(), static_cast<std::int64_t>(W.a.size()), W.rows, W.cols) {}
  SketchTerm draw(RngStream& rng) const;

private:
  std::vector<double> w_;
  std::vector<double> cdf_;
  int rows_, cols_;
};

SketchTerm sketch_vector(const Vector& w, RngStream& rng);
SketchTerm sketch_matrix(const Matrix& W, RngStream& rng);
KSketch ksketch(const Matrix& W, int k, RngStream rng);

// x |-> (1/k) sum payload_j * E_{a,b} x; never materializes the dense matrix.
Vector apply_ksketch(const KSketch& s, const Vector& x);

// Dense reconstruction, for oracles and small cases.
Matrix ksketch_dense(const KSketch& s);

// Payload range used by the fixed-width encoding: [-ceil(d1*d2*M), ceil(d1*d2*M)+1],
// i.e. 2*ceil(d1*d2*M) + 2 representable values. Draws outside it indicate a bug.
std::int64_t sketch_payload_cap(std::int64_t d, double M_bound);

Bracketed encode_sketch(const KSketch& s, double M_bound);
KSketch decode_sketch(const Bracketed& code, int rows, int cols, int k, double M_bound);

}  // namespace adl
