#include "adl/compressor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>

#include <json.hpp>

#include "adl/parallel.hpp"

namespace adl {

namespace {

constexpr int kTaylorCap = 64;   // gate tail probability < 4^-64
constexpr int kHeaderBits = 7;   // encodes the max retained Taylor index
constexpr int kCoeffCache = 12;  // orders precomputed per seed entry

int ceil_int(double v) { return static_cast<int>(std::ceil(v - 1e-12)); }

Matrix zero_like(int rows, int cols) { return Matrix(rows, cols); }

void add_table(Table& acc, const Table& t) {
  for (std::size_t x = 0; x < acc.size(); ++x)
    for (std::size_t c = 0; c < acc[x].size(); ++c) acc[x][c] += t[x][c];
}

}  // namespace

void SampleSet::validate() const {
  if (points.empty()) throw InvalidInput("sample set is empty");
  std::size_t d = points[0].size();
  if (d == 0) throw InvalidInput("sample points have dimension zero");
  for (const auto& p : points) {
    if (p.size() != d) throw InvalidInput("sample points have inconsistent dimensions");
    if (!all_finite(p)) throw InvalidInput("sample point has non-finite entries");
    if (input_radius > 0.0 && norm2(p) > input_radius * (1.0 + 1e-9) + 1e-12)
      throw InvalidInput("sample point outside the declared input radius");
  }
}

void NetworkSpec::validate() const {
  int t = depth();
  if (t < 1) throw InvalidInput("network must have at least one layer");
  if (static_cast<int>(dims.size()) != t + 1) throw InvalidInput("dims must list d0..dt");
  if (!refs.empty() && static_cast<int>(refs.size()) != t)
    throw InvalidInput("refs must be absent or match the layer count");
  if (r < 0.0 || R < 0.0) throw InvalidInput("r and R must be nonnegative");
  for (int i = 0; i < t; ++i) {
    const Matrix& W = layers[static_cast<std::size_t>(i)];
    if (W.rows != dims[static_cast<std::size_t>(i) + 1] || W.cols != dims[static_cast<std::size_t>(i)])
      throw InvalidInput("layer " + std::to_string(i + 1) + " shape does not chain");
    if (!all_finite(W)) throw InvalidInput("layer " + std::to_string(i + 1) + " has non-finite entries");
    Matrix V = refs.empty() ? W : matsub(W, refs[static_cast<std::size_t>(i)]);
    double fro = frobenius_norm(V);
    if (fro > R * (1.0 + 1e-9) + 1e-12)
      throw ContractViolation("layer " + std::to_string(i + 1) + " exceeds the Frobenius cap R");
    if (spectral_norm(V) > r * (1.0 + 1e-6) + 1e-9)
      throw ContractViolation("layer " + std::to_string(i + 1) + " exceeds the spectral cap r");
  }
}

// ---------------------------------------------------------------------------
// NetworkCompressor

struct NetworkCompressor::Ctx {
  bool decoding = false;
  bool serial = false;
  const std::vector<bool>* in = nullptr;
  std::size_t cursor = 0;
  std::vector<bool>* out = nullptr;
  std::vector<std::int64_t> stage_bits;
  std::int64_t nodes = 0;
  int max_N = 0;
  std::int64_t budget = 0;

  std::uint64_t io_uint(int stage, std::uint64_t v, int width) {
    if (decoding) {
      if (cursor + static_cast<std::size_t>(width) > in->size())
        throw ParseError("code truncated", cursor);
      v = 0;
      for (int i = 0; i < width; ++i) v = (v << 1) | ((*in)[cursor++] ? 1u : 0u);
    } else if (out) {
      for (int i = width - 1; i >= 0; --i) out->push_back((v >> i) & 1);
    }
    stage_bits[static_cast<std::size_t>(stage)] += width;
    return v;
  }

  void count_node() {
    if (++nodes > budget) throw ResourceError("estimator tree exceeded the node budget");
  }
};

NetworkCompressor::NetworkCompressor(const NetworkSpec& net, const SampleSet& A, Options opts)
    : net_(net), A_(A), opts_(opts) {
  net_.validate();
  A_.validate();
  if (net_.dims[0] != A_.dim()) throw InvalidInput("sample dimension does not match d0");
  if (net_.refs.empty()) {
    net_.refs.reserve(static_cast<std::size_t>(net_.depth()));
    for (int i = 0; i < net_.depth(); ++i)
      net_.refs.push_back(zero_like(net_.dims[static_cast<std::size_t>(i) + 1],
                                    net_.dims[static_cast<std::size_t>(i)]));
  }
  B_ = strongly_bounded_B();
  eps_ = 1.0 / (std::sqrt(72.0) * B_);
  taylor_radius_ = 0.95 / B_;
  int t = net_.depth();
  int m = A_.m();
  if (t > 1 && net_.activation == ActKind::Relu)
    throw InvalidInput("the recursive compressor requires a softplus or sigmoid activation");

  // exact forward pass per stage
  true_values_.resize(static_cast<std::size_t>(2 * t));
  true_values_[0] = A_.points;
  for (int i = 1; i <= t; ++i) {
    const Matrix& W = net_.layers[static_cast<std::size_t>(i - 1)];
    const Table& prev = true_values_[static_cast<std::size_t>(2 * i - 2)];
    Table z(static_cast<std::size_t>(m));
    for (int x = 0; x < m; ++x) z[static_cast<std::size_t>(x)] = matvec(W, prev[static_cast<std::size_t>(x)]);
    true_values_[static_cast<std::size_t>(2 * i - 1)] = z;
    if (i < t) {
      Table h = z;
      for (auto& row : h)
        for (auto& v : row) v = activation_eval(net_.activation, v);
      true_values_[static_cast<std::size_t>(2 * i)] = std::move(h);
    }
  }

  // stage constants
  stages_.resize(static_cast<std::size_t>(2 * t));
  stages_[0].kind = StageInfo::Kind::Input;
  stages_[0].d = net_.dims[0];
  int k1 = ceil_int(2.0 * net_.r * net_.r) + 1;
  int k72 = ceil_int(72.0 * B_ * B_);
  for (int i = 1; i <= t; ++i) {
    StageInfo& st = stages_[static_cast<std::size_t>(2 * i - 1)];
    st.kind = StageInfo::Kind::Linear;
    st.layer = i;
    st.d = net_.dims[static_cast<std::size_t>(i)];
    st.k1 = k1;
    double M = 0.0;
    for (const auto& row : true_values_[static_cast<std::size_t>(2 * i - 2)])
      M = std::max(M, norm2(row));
    st.M_prev = M;
    st.k2 = ceil_int(2.0 * (st.d + M * M) * (2.0 * net_.R * net_.R + 1.0));
    st.M_bound = net_.R;
    if (i < t) {
      StageInfo& sa = stages_[static_cast<std::size_t>(2 * i)];
      sa.kind = StageInfo::Kind::Act;
      sa.layer = i;
      sa.d = st.d;
      sa.k72 = k72;
      sa.n0 = ceil_int(std::log(static_cast<double>(sa.d)) / std::log(3.0) / 2.0);
      sa.eps = eps_;
      double Ml = 0.0;
      for (const auto& row : true_values_[static_cast<std::size_t>(2 * i - 1)])
        for (double v : row) Ml = std::max(Ml, std::abs(v));
      sa.M_layer = Ml;
    }
  }

  // sketch distributions and reference-matrix bookkeeping
  dists_.reserve(static_cast<std::size_t>(t));
  w0_zero_.resize(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) {
    Matrix V = matsub(net_.layers[static_cast<std::size_t>(i)], net_.refs[static_cast<std::size_t>(i)]);
    dists_.emplace_back(V);
    bool z = true;
    for (double v : net_.refs[static_cast<std::size_t>(i)].a)
      if (v != 0.0) { z = false; break; }
    w0_zero_[static_cast<std::size_t>(i)] = z ? 1 : 0;
  }
  w0x_.assign(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(net_.dims[1]), 0.0));
  if (!w0_zero_[0])
    for (int x = 0; x < m; ++x)
      w0x_[static_cast<std::size_t>(x)] = matvec(net_.refs[0], A_.points[static_cast<std::size_t>(x)]);

  // seeds: quantized pre-activation tables on an eps-grid over [-M, M]
  if (!opts_.no_seed) {
    for (int i = 1; i < t; ++i) {
      StageInfo& sa = stages_[static_cast<std::size_t>(2 * i)];
      double M = sa.M_layer;
      std::int64_t q = static_cast<std::int64_t>(std::ceil(2.0 * M / eps_)) + 1;
      int width = bounded_int_width(0, q - 1);
      std::vector<bool> bits;
      bits.reserve(64 + static_cast<std::size_t>(m) * sa.d * width);
      std::uint64_t Mbits = std::bit_cast<std::uint64_t>(M);
      for (int b = 63; b >= 0; --b) bits.push_back((Mbits >> b) & 1);
      Table seed(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(sa.d)));
      const Table& z = true_values_[static_cast<std::size_t>(2 * i - 1)];
      for (int x = 0; x < m; ++x) {
        for (int c = 0; c < sa.d; ++c) {
          double v = z[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)];
          std::int64_t idx = static_cast<std::int64_t>(std::llround((v + M) / eps_));
          idx = std::clamp<std::int64_t>(idx, 0, q - 1);
          for (int b = width - 1; b >= 0; --b) bits.push_back((static_cast<std::uint64_t>(idx) >> b) & 1);
          seed[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] = -M + static_cast<double>(idx) * eps_;
        }
      }
      sa.seed_bits = static_cast<std::int64_t>(bits.size());
      seeds_.push_back(Bracketed::bit_run(bits));
      Table rho = seed;
      for (auto& row : rho)
        for (auto& v : row) v = activation_eval(net_.activation, v);
      std::vector<std::vector<double>> cf;
      cf.reserve(static_cast<std::size_t>(m) * sa.d);
      for (const auto& row : seed)
        for (double v : row) cf.push_back(taylor_coeffs(net_.activation, v, kCoeffCache));
      seed_tables_.push_back(std::move(seed));
      rho_seed_.push_back(std::move(rho));
      coeff_.push_back(std::move(cf));
    }
  }

  double exp_nodes = expected_nodes();
  if (exp_nodes > static_cast<double>(opts_.node_budget))
    throw ResourceError("expected estimator tree size " + std::to_string(exp_nodes) +
                        " exceeds the node budget");
}

double NetworkCompressor::expected_nodes() const {
  int t = net_.depth();
  double nodes = 1.0;  // input
  for (int i = 1; i <= t; ++i) {
    const StageInfo& st = stages_[static_cast<std::size_t>(2 * i - 1)];
    nodes = 1.0 + (i == 1 ? 0.0 : st.k1 * nodes);
    if (i < t) {
      const StageInfo& sa = stages_[static_cast<std::size_t>(2 * i)];
      double exp_N = sa.n0 + 1.0;  // gate tail beyond n0 contributes < 1 in expectation
      double extra = opts_.no_seed ? 9.0 : 0.0;
      nodes = 1.0 + (exp_N + extra) * sa.k72 * nodes;
    }
  }
  return nodes;
}

std::int64_t NetworkCompressor::seed_bits_total() const {
  std::int64_t s = 0;
  for (const auto& st : stages_)
    if (st.kind == StageInfo::Kind::Act) s += st.seed_bits;
  return s;
}

std::vector<SketchTerm> NetworkCompressor::io_sketch(int s, Ctx& ctx, RngStream rng) const {
  const StageInfo& st = stages_[static_cast<std::size_t>(s)];
  int d1 = net_.dims[static_cast<std::size_t>(st.layer - 1)];
  std::int64_t flat = static_cast<std::int64_t>(st.d) * d1;
  std::int64_t cap = sketch_payload_cap(flat, st.M_bound);
  int wi = bounded_int_width(0, flat - 1);
  int wp = bounded_int_width(-cap, cap + 1);
  const SketchDist& dist = dists_[static_cast<std::size_t>(st.layer - 1)];
  std::vector<SketchTerm> terms(static_cast<std::size_t>(st.k2));
  for (int j = 0; j < st.k2; ++j) {
    SketchTerm t;
    if (!ctx.decoding) {
      RngStream cs = rng.child(static_cast<std::uint64_t>(j));
      t = dist.draw(cs);
      if (t.payload < -cap || t.payload > cap + 1)
        throw ContractViolation("sketch payload outside the theoretical range");
    }
    t.index = static_cast<std::int64_t>(ctx.io_uint(s, static_cast<std::uint64_t>(t.index), wi));
    t.payload = static_cast<std::int64_t>(
                    ctx.io_uint(s, static_cast<std::uint64_t>(t.payload + cap), wp)) - cap;
    if (t.index >= flat) throw ParseError("sketch index out of range", ctx.cursor);
    t.rows = st.d;
    t.cols = d1;
    terms[static_cast<std::size_t>(j)] = t;
  }
  return terms;
}

double NetworkCompressor::coeff(int act_idx, std::size_t entry, int n, const Table& seed) const {
  if (!opts_.no_seed && n <= kCoeffCache)
    return coeff_[static_cast<std::size_t>(act_idx)][entry][static_cast<std::size_t>(n)];
  std::size_t d = seed[0].size();
  double center = seed[entry / d][entry % d];
  double fact = 1.0;
  for (int i = 2; i <= n; ++i) fact *= i;
  return activation_derivative(net_.activation, center, n) / fact;
}

Table NetworkCompressor::eval_mean_group(int linear_stage, int count, Ctx& ctx, RngStream rng) const {
  const StageInfo& st = stages_[static_cast<std::size_t>(linear_stage)];
  int m = A_.m();
  if (st.kind == StageInfo::Kind::Linear && st.layer == 1) {
    // the layer-1 input is deterministic, so the whole group collapses to one
    // summed sketch applied to the sample set; payload sums are exact integers
    int d1 = net_.dims[0];
    std::vector<std::int64_t> S(static_cast<std::size_t>(st.d) * d1, 0);
    for (int j = 0; j < count; ++j) {
      auto terms = io_sketch(linear_stage, ctx, rng.child(static_cast<std::uint64_t>(j)));
      ctx.count_node();
      for (const auto& t : terms) S[static_cast<std::size_t>(t.index)] += t.payload;
    }
    double scale = 1.0 / (static_cast<double>(st.k2) * count);
    Table out(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(st.d), 0.0));
    for (int x = 0; x < m; ++x) {
      const Vector& in = A_.points[static_cast<std::size_t>(x)];
      Vector& y = out[static_cast<std::size_t>(x)];
      for (int a = 0; a < st.d; ++a) {
        double acc = 0.0;
        const std::int64_t* row = &S[static_cast<std::size_t>(a) * d1];
        for (int b = 0; b < d1; ++b) acc += static_cast<double>(row[b]) * in[static_cast<std::size_t>(b)];
        y[static_cast<std::size_t>(a)] = acc * scale + w0x_[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)];
      }
    }
    return out;
  }
  // generic group: `count` full evaluations averaged in fixed order
  Table acc(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(st.d), 0.0));
  bool parallel = !ctx.serial && thread_count() > 1 && count >= 8;
  if (parallel) {
    std::vector<Table> results(static_cast<std::size_t>(count));
    std::vector<Ctx> shards(static_cast<std::size_t>(count));
    for (auto& sh : shards) {
      sh.stage_bits.assign(stages_.size(), 0);
      sh.budget = ctx.budget;
    }
    parallel_for(count, [&](std::int64_t j) {
      results[static_cast<std::size_t>(j)] =
          eval_stage(linear_stage, shards[static_cast<std::size_t>(j)], rng.child(static_cast<std::uint64_t>(j)));
    });
    for (int j = 0; j < count; ++j) {
      add_table(acc, results[static_cast<std::size_t>(j)]);
      const Ctx& sh = shards[static_cast<std::size_t>(j)];
      for (std::size_t s = 0; s < stages_.size(); ++s) ctx.stage_bits[s] += sh.stage_bits[s];
      ctx.nodes += sh.nodes;
      ctx.max_N = std::max(ctx.max_N, sh.max_N);
    }
    if (ctx.nodes > ctx.budget) throw ResourceError("estimator tree exceeded the node budget");
  } else {
    for (int j = 0; j < count; ++j)
      add_table(acc, eval_stage(linear_stage, ctx, rng.child(static_cast<std::uint64_t>(j))));
  }
  for (auto& row : acc)
    for (auto& v : row) v /= static_cast<double>(count);
  return acc;
}

Table NetworkCompressor::eval_stage(int s, Ctx& ctx, RngStream rng) const {
  const StageInfo& st = stages_[static_cast<std::size_t>(s)];
  int m = A_.m();
  if (st.kind == StageInfo::Kind::Input) return A_.points;
  if (st.kind == StageInfo::Kind::Linear) {
    ctx.count_node();
    Table hbar;
    if (st.layer == 1) {
      hbar = A_.points;  // k1 deterministic input draws are all identical
    } else {
      hbar = eval_mean_group(s - 1, st.k1, ctx, rng);
    }
    auto terms = io_sketch(s, ctx, rng.child(1'000'000));
    const Matrix& W0 = net_.refs[static_cast<std::size_t>(st.layer - 1)];
    bool w0z = w0_zero_[static_cast<std::size_t>(st.layer - 1)] != 0;
    Table out(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(st.d), 0.0));
    if (!w0z)
      for (int x = 0; x < m; ++x) out[static_cast<std::size_t>(x)] = matvec(W0, hbar[static_cast<std::size_t>(x)]);
    double inv_k = 1.0 / static_cast<double>(st.k2);
    int d1 = net_.dims[static_cast<std::size_t>(st.layer - 1)];
    for (const auto& t : terms) {
      std::int64_t a = t.index / d1;
      std::int64_t b = t.index % d1;
      double c = inv_k * static_cast<double>(t.payload);
      for (int x = 0; x < m; ++x)
        out[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)] +=
            c * hbar[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)];
    }
    return out;
  }

  // activation stage
  ctx.count_node();
  int act_idx = st.layer - 1;  // activation stages are 1..t-1
  Table seed;
  const Table* seed_ptr = nullptr;
  if (opts_.no_seed) {
    // experimental: transmit a per-draw median of 9 mean-combined estimators
    std::vector<Table> med_draws(9);
    for (int j = 0; j < 9; ++j)
      med_draws[static_cast<std::size_t>(j)] =
          eval_mean_group(s - 1, st.k72 * 9, ctx, rng.child(100 + static_cast<std::uint64_t>(j)));
    seed.assign(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(st.d)));
    std::vector<double> col(9);
    for (int x = 0; x < m; ++x)
      for (int c = 0; c < st.d; ++c) {
        for (int j = 0; j < 9; ++j)
          col[static_cast<std::size_t>(j)] =
              med_draws[static_cast<std::size_t>(j)][static_cast<std::size_t>(x)][static_cast<std::size_t>(c)];
        std::sort(col.begin(), col.end());
        seed[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] = col[4];
      }
    seed_ptr = &seed;
  } else {
    seed_ptr = &seed_tables_[static_cast<std::size_t>(act_idx)];
  }
  const Table& h_tilde = *seed_ptr;

  // gate header: sample all capped gates so stream use is fixed, then encode
  // the max retained index and the undetermined gates below it
  bool Z[kTaylorCap + 1] = {false};
  int N = 0;
  if (!ctx.decoding) {
    RngStream gs = rng.child(0);
    for (int n = 1; n <= st.n0 && n <= kTaylorCap; ++n) Z[n] = true;
    for (int n = st.n0 + 1; n <= kTaylorCap; ++n) Z[n] = gs.bernoulli(std::pow(0.25, n));
    for (int n = 1; n <= kTaylorCap; ++n)
      if (Z[n]) N = n;
  }
  N = static_cast<int>(ctx.io_uint(s, static_cast<std::uint64_t>(N), kHeaderBits));
  if (N > kTaylorCap) throw ParseError("Taylor index exceeds the cap", ctx.cursor);
  if (ctx.decoding)
    for (int n = 1; n <= std::min(N, st.n0); ++n) Z[n] = true;
  for (int n = st.n0 + 1; n <= N; ++n)
    Z[n] = ctx.io_uint(s, Z[n] ? 1 : 0, 1) != 0;
  if (!ctx.decoding && N > 0 && !Z[N]) throw ContractViolation("gate bookkeeping error");
  ctx.max_N = std::max(ctx.max_N, N);

  Table g = opts_.no_seed ? h_tilde : rho_seed_[static_cast<std::size_t>(act_idx)];
  if (opts_.no_seed)
    for (auto& row : g)
      for (auto& v : row) v = activation_eval(net_.activation, v);
  Table P(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(st.d), 1.0));
  for (int n = 1; n <= N; ++n) {
    Table hn = eval_mean_group(s - 1, st.k72, ctx, rng.child(static_cast<std::uint64_t>(n)));
    for (int x = 0; x < m; ++x) {
      for (int c = 0; c < st.d; ++c) {
        double delta = hn[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] -
                       h_tilde[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)];
        if (std::abs(delta) > taylor_radius_)
          throw ContractViolation("estimator escaped the Taylor radius at sample point " +
                                  std::to_string(x) + ", coordinate " + std::to_string(c));
        P[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] *= delta;
      }
    }
    if (Z[n]) {
      double inv_p = n <= st.n0 ? 1.0 : std::pow(4.0, n);
      for (int x = 0; x < m; ++x)
        for (int c = 0; c < st.d; ++c) {
          std::size_t e = static_cast<std::size_t>(x) * st.d + static_cast<std::size_t>(c);
          g[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] +=
              coeff(act_idx, e, n, h_tilde) * inv_p *
              P[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)];
        }
    }
  }
  return g;
}

DrawResult NetworkCompressor::draw(RngStream rng) const {
  Ctx ctx;
  ctx.stage_bits.assign(stages_.size(), 0);
  ctx.budget = opts_.node_budget;
  std::vector<bool> buffer;
  if (opts_.materialize_codes) {
    ctx.out = &buffer;
    ctx.serial = true;
  }
  DrawResult res;
  res.values = eval_stage(static_cast<int>(stages_.size()) - 1, ctx, rng);
  res.stage_code_bits = ctx.stage_bits;
  for (auto b : ctx.stage_bits) res.code_bits += b;
  res.nodes = ctx.nodes;
  res.max_taylor_index = ctx.max_N;
  if (opts_.materialize_codes) res.code = Bracketed::bit_run(buffer);
  return res;
}

DrawResult NetworkCompressor::decode(const Bracketed& code) const {
  std::vector<bool> bits = code.leaf_bits();
  Ctx ctx;
  ctx.decoding = true;
  ctx.serial = true;
  ctx.in = &bits;
  ctx.stage_bits.assign(stages_.size(), 0);
  ctx.budget = opts_.node_budget;
  DrawResult res;
  res.values = eval_stage(static_cast<int>(stages_.size()) - 1, ctx, RngStream(0));
  if (ctx.cursor != bits.size()) throw ParseError("trailing bits in code", ctx.cursor);
  res.stage_code_bits = ctx.stage_bits;
  for (auto b : ctx.stage_bits) res.code_bits += b;
  res.nodes = ctx.nodes;
  res.max_taylor_index = ctx.max_N;
  return res;
}

// ---------------------------------------------------------------------------
// single-layer combinators

Table compress_linear_layer(const LayerSource& prev, const Matrix& W, const Matrix& W0,
                            double r, double R, double M_prev, RngStream rng,
                            std::int64_t* code_bits) {
  if (M_prev <= 0.0) throw ContractViolation("incoming norm bound must be positive");
  Matrix V = matsub(W, W0);
  if (frobenius_norm(V) > R * (1.0 + 1e-9) + 1e-12 || spectral_norm(V) > r * (1.0 + 1e-6) + 1e-9)
    throw ContractViolation("layer difference exceeds the declared r/R caps");
  int k1 = ceil_int(2.0 * r * r) + 1;
  int k2 = ceil_int(2.0 * (W.rows + M_prev * M_prev) * (2.0 * R * R + 1.0));
  int m = static_cast<int>(prev.true_values.size());
  Table hbar(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(prev.d), 0.0));
  for (int j = 0; j < k1; ++j)
    add_table(hbar, prev.draw_table(rng.child(static_cast<std::uint64_t>(j))));
  for (auto& row : hbar)
    for (auto& v : row) v /= static_cast<double>(k1);
  KSketch s = ksketch(V, k2, rng.child(static_cast<std::uint64_t>(k1)));
  Table out(static_cast<std::size_t>(m));
  for (int x = 0; x < m; ++x) {
    Vector y = apply_ksketch(s, hbar[static_cast<std::size_t>(x)]);
    Vector y0 = matvec(W0, hbar[static_cast<std::size_t>(x)]);
    for (std::size_t c = 0; c < y.size(); ++c) y[c] += y0[c];
    out[static_cast<std::size_t>(x)] = std::move(y);
  }
  if (code_bits) *code_bits = k1 * prev.bits_per_draw + encode_sketch(s, R).len();
  return out;
}

Table compress_activation_layer(const LayerSource& prev, ActKind act, const Table& seed,
                                RngStream rng, int* max_index, std::int64_t* code_bits) {
  double B = strongly_bounded_B();
  double eps = 1.0 / (std::sqrt(72.0) * B);
  if (prev.sigma > eps * (1.0 + 1e-9))
    throw ContractViolation("previous-layer sigma exceeds the activation budget");
  int m = static_cast<int>(prev.true_values.size());
  int d = prev.d;
  for (int x = 0; x < m; ++x)
    for (int c = 0; c < d; ++c)
      if (std::abs(seed[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] -
                   prev.true_values[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)]) >
          eps * (1.0 + 1e-9))
        throw ContractViolation("seed deviates more than eps at sample point " + std::to_string(x));
  int n0 = ceil_int(std::log(static_cast<double>(d)) / std::log(3.0) / 2.0);
  bool Z[kTaylorCap + 1] = {false};
  RngStream gs = rng.child(0);
  int N = 0;
  for (int n = 1; n <= std::min(n0, kTaylorCap); ++n) Z[n] = true;
  for (int n = n0 + 1; n <= kTaylorCap; ++n) Z[n] = gs.bernoulli(std::pow(0.25, n));
  for (int n = 1; n <= kTaylorCap; ++n)
    if (Z[n]) N = n;
  if (max_index) *max_index = N;

  std::vector<std::vector<double>> cf;
  cf.reserve(static_cast<std::size_t>(m) * d);
  int pre = std::max(N, 1);
  for (const auto& row : seed)
    for (double v : row) cf.push_back(taylor_coeffs(act, v, std::min(pre, 64)));

  Table g(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(d)));
  for (int x = 0; x < m; ++x)
    for (int c = 0; c < d; ++c)
      g[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] =
          activation_eval(act, seed[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)]);
  Table P(static_cast<std::size_t>(m), Vector(static_cast<std::size_t>(d), 1.0));
  double radius = 0.95 / B;
  for (int n = 1; n <= N; ++n) {
    Table hn = prev.draw_table(rng.child(static_cast<std::uint64_t>(n)));
    for (int x = 0; x < m; ++x)
      for (int c = 0; c < d; ++c) {
        double delta = hn[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] -
                       seed[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)];
        if (std::abs(delta) > radius)
          throw ContractViolation("estimator escaped the Taylor radius at sample point " +
                                  std::to_string(x));
        P[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] *= delta;
      }
    if (Z[n]) {
      double inv_p = n <= n0 ? 1.0 : std::pow(4.0, n);
      for (int x = 0; x < m; ++x)
        for (int c = 0; c < d; ++c) {
          std::size_t e = static_cast<std::size_t>(x) * d + static_cast<std::size_t>(c);
          g[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)] +=
              cf[e][static_cast<std::size_t>(n)] * inv_p *
              P[static_cast<std::size_t>(x)][static_cast<std::size_t>(c)];
        }
    }
  }
  if (code_bits) *code_bits = kHeaderBits + std::max(0, N - n0) + N * prev.bits_per_draw;
  return g;
}

// ---------------------------------------------------------------------------
// theoretical budget and bound calculators

AdlBudget adl_theoretical(const NetworkSpec& net, std::int64_t m) {
  net.validate();
  double B = strongly_bounded_B();
  AdlBudget b;
  int t = net.depth();
  for (int i = 1; i <= t; ++i) {
    double d1 = net.dims[static_cast<std::size_t>(i - 1)];
    double d2 = net.dims[static_cast<std::size_t>(i)];
    double M = std::sqrt(d1);  // incoming-norm convention, constant 1
    double w0 = net.refs.empty() ? 0.0 : spectral_norm(net.refs[static_cast<std::size_t>(i - 1)]);
    double nprime = b.n * (net.r * net.r + w0 * w0 + 1.0) +
                    (d1 + M * M) * (net.R * net.R + 1.0) * std::log2(net.R * d1 * d2 + 1.0);
    if (i < t) {
      b.n_s += nprime * B * B * std::log2(static_cast<double>(m) * d2);
      b.n = nprime * B * B * std::log2(d2);
    } else {
      b.n = nprime;
    }
    b.per_layer_n.push_back(b.n);
  }
  return b;
}

double covering_log_size(double n_s, double n, double eps, std::int64_t m, int d) {
  if (eps <= 0.0 || eps > 1.0) throw InvalidInput("eps must be in (0, 1]");
  if (d <= 1) return n_s + n / (eps * eps);
  return n_s + n * std::log2(static_cast<double>(d) * static_cast<double>(m)) / (eps * eps);
}

std::pair<double, double> generalization_bound(double n_s, double n, const BoundInputs& b) {
  if (b.m < 1 || b.d < 1 || b.delta <= 0.0 || b.delta > 1.0 || b.L <= 0.0 || b.B_loss <= 0.0)
    throw InvalidInput("invalid bound inputs");
  double dm = static_cast<double>(b.d) * static_cast<double>(b.m);
  double inner = b.d <= 1 ? n_s + n : n_s + n * std::log2(dm);
  double m = static_cast<double>(b.m);
  double expected = (b.L + b.B_loss) * std::sqrt(inner) / std::sqrt(m) * std::log2(m);
  double high = expected + b.B_loss * std::sqrt(2.0 * std::log(2.0 / b.delta) / m);
  return {expected, high};
}

double estimate_representativeness(const NetworkSpec& net, const SampleSet& train,
                                   const SampleSet& test, int search_draws, double B_loss,
                                   RngStream rng) {
  net.validate();
  train.validate();
  test.validate();
  if (search_draws < 1) throw InvalidInput("search_draws must be positive");
  NetworkSpec base = net;
  if (base.refs.empty()) {
    for (int i = 0; i < base.depth(); ++i)
      base.refs.push_back(zero_like(base.dims[static_cast<std::size_t>(i) + 1],
                                    base.dims[static_cast<std::size_t>(i)]));
  }
  auto loss_of = [&](const NetworkSpec& n2, const SampleSet& S) {
    double acc = 0.0;
    for (const auto& x : S.points) {
      Vector h = x;
      for (int i = 0; i < n2.depth(); ++i) {
        h = matvec(n2.layers[static_cast<std::size_t>(i)], h);
        if (i + 1 < n2.depth())
          for (auto& v : h) v = activation_eval(n2.activation, v);
      }
      acc += std::min(B_loss, norm_inf(h));
    }
    return acc / static_cast<double>(S.m());
  };
  double best = -1e300;
  for (int s = 0; s < search_draws; ++s) {
    RngStream ds = rng.child(static_cast<std::uint64_t>(s));
    NetworkSpec cand = base;
    for (int i = 0; i < base.depth(); ++i) {
      Matrix G(base.dims[static_cast<std::size_t>(i) + 1], base.dims[static_cast<std::size_t>(i)]);
      RngStream gsr = ds.child(static_cast<std::uint64_t>(i));
      for (auto& v : G.a) v = gsr.gaussian();
      double sn = spectral_norm(G);
      double fn = frobenius_norm(G);
      double cap = std::min(sn > 0 ? base.r / sn : 0.0, fn > 0 ? base.R / fn : 0.0);
      double u = ds.child(1000 + static_cast<std::uint64_t>(i)).uniform();
      for (std::size_t e = 0; e < G.a.size(); ++e)
        cand.layers[static_cast<std::size_t>(i)].a[e] =
            base.refs[static_cast<std::size_t>(i)].a[e] + u * cap * G.a[e];
    }
    double gap = loss_of(cand, test) - loss_of(cand, train);
    best = std::max(best, gap);
  }
  return best;
}

// ---------------------------------------------------------------------------
// file formats

NetworkSpec network_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("network JSON: ") + e.what(), static_cast<std::size_t>(e.byte));
  }
  NetworkSpec net;
  try {
    net.dims = j.at("dims").get<std::vector<int>>();
    net.activation = activation_from_name(j.at("activation").get<std::string>());
    net.r = j.at("r").get<double>();
    net.R = j.at("R").get<double>();
    auto rows = j.at("layers");
    for (std::size_t i = 0; i + 1 < net.dims.size(); ++i) {
      Matrix W(net.dims[i + 1], net.dims[i]);
      auto flat = rows.at(i).get<std::vector<double>>();
      if (flat.size() != W.a.size())
        throw InvalidInput("layers[" + std::to_string(i) + "] has wrong entry count");
      W.a = std::move(flat);
      net.layers.push_back(std::move(W));
    }
    if (j.contains("refs")) {
      auto rrows = j.at("refs");
      for (std::size_t i = 0; i + 1 < net.dims.size(); ++i) {
        Matrix W(net.dims[i + 1], net.dims[i]);
        auto flat = rrows.at(i).get<std::vector<double>>();
        if (flat.size() != W.a.size())
          throw InvalidInput("refs[" + std::to_string(i) + "] has wrong entry count");
        W.a = std::move(flat);
        net.refs.push_back(std::move(W));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("network JSON: ") + e.what());
  }
  net.validate();
  return net;
}

std::string network_to_json(const NetworkSpec& net) {
  nlohmann::json j;
  j["dims"] = net.dims;
  j["activation"] = activation_name(net.activation);
  j["r"] = net.r;
  j["R"] = net.R;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& W : net.layers) rows.push_back(W.a);
  j["layers"] = std::move(rows);
  if (!net.refs.empty()) {
    nlohmann::json rrows = nlohmann::json::array();
    for (const auto& W : net.refs) rrows.push_back(W.a);
    j["refs"] = std::move(rrows);
  }
  return j.dump();
}

SampleSet samples_from_csv(const std::string& text, double input_radius) {
  SampleSet s;
  s.input_radius = input_radius;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    std::size_t line_start = offset;
    offset += line.size() + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("x0", 0) == 0) continue;  // header row present
    }
    Vector row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument("trailing junk");
      } catch (const std::exception&) {
        throw ParseError("bad CSV number '" + cell + "'", line_start);
      }
    }
    s.points.push_back(std::move(row));
  }
  s.validate();
  return s;
}

std::string samples_to_csv(const SampleSet& s) {
  std::string out;
  int d = s.dim();
  for (int c = 0; c < d; ++c) {
    out += "x" + std::to_string(c);
    out += (c + 1 < d) ? ',' : '\n';
  }
  char buf[32];
  for (const auto& row : s.points) {
    for (int c = 0; c < d; ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[static_cast<std::size_t>(c)]);
      out += buf;
      out += (c + 1 < d) ? ',' : '\n';
    }
  }
  return out;
}

}  // namespace adl
