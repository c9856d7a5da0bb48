#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "adl/activations.hpp"
#include "adl/codec.hpp"
#include "adl/estimators.hpp"
#include "adl/numerics.hpp"
#include "adl/rng.hpp"
#include "adl/sketch.hpp"

namespace adl {

// m x d table of values on a fixed sample set.
using Table = std::vector<Vector>;

struct SampleSet {
  Table points;
  double input_radius = 0.0;
  int m() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points[0].size()); }
  void validate() const;
};

struct NetworkSpec {
  std::vector<int> dims;       // d0..dt
  ActKind activation = ActKind::Softplus;
  std::vector<Matrix> layers;  // W_1..W_t
  std::vector<Matrix> refs;    // reference matrices, zero if absent
  double r = 1.0;
  double R = 1.0;
  int depth() const { return static_cast<int>(layers.size()); }
  // Checks shape chaining and the class constraints ||W_i - W_i0|| <= r,
  // ||W_i - W_i0||_F <= R.
  void validate() const;
};

// Per-stage constants of the compression pipeline, all derived from the
// network/sample set and recorded in reports.
struct StageInfo {
  enum class Kind { Input, Linear, Act };
  Kind kind = Kind::Input;
  int layer = 0;  // 1-based layer index for Linear/Act
  int d = 0;      // output dimension of this stage
  // linear stages
  int k1 = 0;           // mean-combined draws of the previous stage
  int k2 = 0;           // sketch terms for W - W0
  double M_prev = 0.0;  // max_A ||h_prev(x)||, the incoming norm bound
  double M_bound = 0.0; // Frobenius bound used for payload encoding (= R)
  // activation stages
  int k72 = 0;          // draws averaged to reach sigma = eps
  int n0 = 0;           // last index with deterministic gate
  double eps = 0.0;
  double M_layer = 0.0; // max |pre-activation entry| over the sample set
  std::int64_t seed_bits = 0;
};

struct AdlBudget {
  double n_s = 0.0;  // theoretical seed bits, all suppressed constants = 1
  double n = 0.0;    // theoretical expected code bits, same convention
  std::vector<double> per_layer_n;  // n after each layer of the recursion
  std::int64_t realized_seed_bits = 0;
  double mean_code_bits = 0.0;
  std::vector<double> per_stage_mean_code_bits;
  bool up_to_universal_constant = true;
};

struct DrawResult {
  Table values;  // m x d_t
  std::int64_t code_bits = 0;
  std::vector<std::int64_t> stage_code_bits;  // by pipeline stage
  std::int64_t nodes = 0;                     // stage evaluations performed
  int max_taylor_index = 0;                   // largest N over activation stages
  Bracketed code;                             // only if materialize_codes
};

// The recursive network compressor: alternates linear stages (mean of k1
// previous draws, k2-sketch of W - W0) and activation stages (quantized seed
// plus the gated Taylor-product estimator). A draw first samples the random
// code -- integer sketch payloads, gate bits -- and then evaluates the value
// table deterministically from (seeds, code), so decode reproduces draws
// bitwise by construction.
class NetworkCompressor {
public:
  struct Options {
    bool materialize_codes = false;
    bool no_seed = false;  // experimental: per-draw transmitted median replaces the seed
    std::int64_t node_budget = 10'000'000;
  };

  NetworkCompressor(const NetworkSpec& net, const SampleSet& A)
      : NetworkCompressor(net, A, Options{}) {}
  NetworkCompressor(const NetworkSpec& net, const SampleSet& A, Options opts);

  DrawResult draw(RngStream rng) const;
  // Recomputes a materialized draw's value table from seeds + code alone.
  DrawResult decode(const Bracketed& code) const;

  const std::vector<StageInfo>& stages() const { return stages_; }
  const std::vector<Bracketed>& seeds() const { return seeds_; }  // one per activation stage
  std::int64_t seed_bits_total() const;
  const Table& true_outputs() const { return true_values_.back(); }
  const Table& layer_values(int stage) const { return true_values_[static_cast<std::size_t>(stage)]; }
  double expected_nodes() const;  // analytic estimate, checked against node_budget

private:
  struct Ctx;
  Table eval_stage(int s, Ctx& ctx, RngStream rng) const;
  Table eval_mean_group(int linear_stage, int count, Ctx& ctx, RngStream rng) const;
  std::vector<SketchTerm> io_sketch(int s, Ctx& ctx, RngStream rng) const;
  double coeff(int act_idx, std::size_t entry, int n, const Table& seed) const;

  NetworkSpec net_;
  SampleSet A_;
  Options opts_;
  std::vector<StageInfo> stages_;
  std::vector<Table> true_values_;  // per stage, exact forward pass
  std::vector<Bracketed> seeds_;    // one per activation stage
  std::vector<Table> seed_tables_;  // quantized h~ per activation stage
  std::vector<Table> rho_seed_;     // rho(h~) per activation stage
  std::vector<std::vector<std::vector<double>>> coeff_;  // [act][entry][order<=12]
  std::vector<SketchDist> dists_;   // per layer, for V = W - W0
  std::vector<char> w0_zero_;       // per layer
  Table w0x_;                       // W0_1 applied to the sample set
  double B_ = 0.0;
  double eps_ = 0.0;
  double taylor_radius_ = 0.0;
};

// Single-layer combinators on explicit estimator sources (the building blocks
// exercised by the unit suites; NetworkCompressor fuses them internally).
struct LayerSource {
  std::function<Table(RngStream)> draw_table;  // fresh sigma-estimator of the layer on A
  Table true_values;
  double sigma = 0.0;
  int d = 0;
  std::int64_t bits_per_draw = 0;  // expected code bits of one draw
};

// One draw of x -> (W - W0)-sketch applied to the k1-mean of prev draws, plus
// W0 times that mean; a 1-estimator of W h_prev on A.
Table compress_linear_layer(const LayerSource& prev, const Matrix& W, const Matrix& W0,
                            double r, double R, double M_prev, RngStream rng,
                            std::int64_t* code_bits = nullptr);

// One draw of the gated Taylor estimator of rho(h) on A, given a seed table
// with ||seed - h||_inf <= eps entrywise and sub-draws at sigma = eps.
Table compress_activation_layer(const LayerSource& prev, ActKind act, const Table& seed,
                                RngStream rng, int* max_index = nullptr,
                                std::int64_t* code_bits = nullptr);

// Theoretical (n_s, n) from the layer recursion with every suppressed
// constant set to 1; M for layer i taken as sqrt(d_{i-1}).
AdlBudget adl_theoretical(const NetworkSpec& net, std::int64_t m);

// log2 covering number bound: n_s + n log2(dm)/eps^2 (d = 1 drops the log).
double covering_log_size(double n_s, double n, double eps, std::int64_t m, int d);

struct BoundInputs {
  double L = 1.0;
  double B_loss = 1.0;
  std::int64_t m = 1;
  int d = 1;
  double delta = 0.05;
};

// (expected, high-probability) representativeness bounds, constants = 1.
std::pair<double, double> generalization_bound(double n_s, double n, const BoundInputs& b);

// Random-search lower estimate of sup_h (test loss - train loss) over the
// network class, absolute loss clipped at B_loss against zero labels.
double estimate_representativeness(const NetworkSpec& net, const SampleSet& train,
                                   const SampleSet& test, int search_draws, double B_loss,
                                   RngStream rng);

// File formats.
NetworkSpec network_from_json(const std::string& text);
std::string network_to_json(const NetworkSpec& net);
SampleSet samples_from_csv(const std::string& text, double input_radius = 0.0);
std::string samples_to_csv(const SampleSet& s);

}  // namespace adl
