// adl: verification suites, compression runs, bound calculators and the
// shattering demo. Exit codes: 0 = pass, 1 = usage/I-O error, 2 = a checked
// assertion failed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adl/activations.hpp"
#include "adl/codec.hpp"
#include "adl/compressor.hpp"
#include "adl/errors.hpp"
#include "adl/estimators.hpp"
#include "adl/numerics.hpp"
#include "adl/parallel.hpp"
#include "adl/rng.hpp"
#include "adl/shattering.hpp"
#include "adl/sketch.hpp"

using nlohmann::json;
using namespace adl;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Check {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  double se = 0.0;
  bool pass = false;
};

json to_json(const Check& c) {
  return json{{"name", c.name}, {"measured", c.measured}, {"bound", c.bound},
              {"se", c.se},     {"pass", c.pass}};
}

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const auto& c : checks) arr.push_back(to_json(c));
  return arr;
}

bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

void emit_report(json report, const std::string& out_path) {
  std::string text = report.dump(2);
  if (!out_path.empty()) {
    std::ofstream f(out_path);
    if (!f) throw ResourceError("cannot open output file: " + out_path);
    f << text << "\n";
  }
  std::cout << text << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ResourceError("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Expectation of one sketch draw by enumerating (index, rounding-bit) outcomes
// with the index-probability formula; independent of the sampler code path.
Vector sketch_expectation_enum(const Vector& w) {
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

EstimatorSampler sketch_sampler(const Vector& w) {
  auto dist = std::make_shared<SketchDist>(w.data(), static_cast<std::int64_t>(w.size()),
                                           static_cast<int>(w.size()), 1);
  EstimatorSampler e;
  e.target = w;
  e.dim = static_cast<int>(w.size());
  double n2 = 0.0;
  for (double v : w) n2 += v * v;
  e.sigma = std::sqrt(0.25 + 2.0 * n2);
  e.sample = [dist, d = w.size()](RngStream rng) {
    Vector v(d, 0.0);
    SketchTerm t = dist->draw(rng);
    v[static_cast<std::size_t>(t.index)] = static_cast<double>(t.payload);
    return v;
  };
  return e;
}

Check claim_check(const std::string& name, const EstimatorSampler& e, std::int64_t trials,
                  int dirs, RngStream rng) {
  VarianceReport r = verify_estimator(e, trials, dirs, rng);
  Check c;
  c.name = name;
  c.measured = r.worst_directional_var;
  c.se = r.standard_error;
  c.bound = e.sigma * e.sigma + 4.0 * r.standard_error;
  c.pass = r.worst_directional_var <= c.bound && r.mean_error_inf <= 4.0 * r.mean_se + 1e-12;
  return c;
}

// ---------------------------------------------------------------- verify

std::vector<Check> suite_sketch(std::int64_t trials, RngStream rng) {
  std::vector<Vector> grid = {
      {0.0},          {1.0},           {-2.0},
      {0.5, -0.5},    {3.0, 4.0},      {0.0, 0.0},
      {1.0, 0.0, 0.0},{0.3, -1.2, 2.5},{1.0, 1.0, 1.0, 1.0},
      {2.0, -1.0, 0.5, -0.25}};
  std::vector<Check> checks;
  int idx = 0;
  for (const auto& w : grid) {
    Vector e = sketch_expectation_enum(w);
    double err = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) err = std::max(err, std::abs(e[i] - w[i]));
    Check c;
    c.name = "expectation_enum_w" + std::to_string(idx);
    c.measured = err;
    c.bound = 1e-10;
    c.pass = err <= c.bound;
    checks.push_back(c);
    checks.push_back(claim_check("directional_variance_w" + std::to_string(idx),
                                 sketch_sampler(w), trials, 64,
                                 rng.child(static_cast<std::uint64_t>(idx))));
    ++idx;
  }
  return checks;
}

std::vector<Check> suite_estimators(std::int64_t trials, RngStream rng) {
  std::vector<Check> checks;
  EstimatorSampler g = gaussian_estimator({1.0, 2.0}, 0.5);
  checks.push_back(claim_check("gaussian", g, trials, 16, rng.child(0)));
  checks.push_back(claim_check("mean_combine_16", mean_combine(g, 16), trials / 4, 16, rng.child(1)));
  Matrix A(2, 2);
  A(0, 0) = 3.0; A(0, 1) = 4.0; A(1, 1) = 1.0;
  checks.push_back(claim_check("affine_map", affine_map(g, A), trials, 16, rng.child(2)));
  checks.push_back(claim_check("sum_combine",
                               sum_combine(g, gaussian_estimator({0.0, -1.0}, 0.25)), trials, 16,
                               rng.child(3)));
  checks.push_back(claim_check(
      "product_combine",
      product_combine({gaussian_estimator({1.0}, 1.0), gaussian_estimator({2.0}, 0.5)}), trials,
      4, rng.child(4)));
  return checks;
}

std::vector<Check> suite_median(std::int64_t trials, RngStream rng) {
  // n = 5 unit-variance estimators of 0, threshold k*sigma with k = 4:
  // exceedance probability < (2/k)^n = 1/32.
  const int n = 5;
  const double k = 4.0;
  std::vector<EstimatorSampler> parts(n, gaussian_estimator({0.0}, 1.0));
  auto med = median_combine(parts);
  struct St { double count = 0.0; };
  St total;
  std::function<void(St&, std::int64_t)> acc = [&](St& st, std::int64_t i) {
    Vector v = med(rng.child(static_cast<std::uint64_t>(i)));
    if (std::abs(v[0]) > k) st.count += 1.0;
  };
  std::function<void(St&, const St&)> merge = [](St& t, const St& s) { t.count += s.count; };
  chunked_reduce<St>(trials, 1024, acc, merge, total);
  double p = total.count / static_cast<double>(trials);
  double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(trials)) /
                        static_cast<double>(trials));
  Check c;
  c.name = "median_tail_n5_k4";
  c.measured = p;
  c.se = se;
  c.bound = 1.0 / 32.0 + 3.0 * se;
  c.pass = p <= c.bound;
  return {c};
}

std::vector<Check> suite_product(std::int64_t trials, RngStream rng) {
  // Three independent mean-1 sigma-1 factors: product variance
  // (1+1)^3 - 1 = 7; empirical value within 5%.
  std::vector<EstimatorSampler> parts(3, gaussian_estimator({1.0}, 1.0));
  EstimatorSampler prod = product_combine(parts);
  struct St { double sum = 0.0, sumsq = 0.0; };
  St total;
  std::function<void(St&, std::int64_t)> acc = [&](St& st, std::int64_t i) {
    double v = prod.sample(rng.child(static_cast<std::uint64_t>(i)))[0];
    st.sum += v;
    st.sumsq += v * v;
  };
  std::function<void(St&, const St&)> merge = [](St& t, const St& s) {
    t.sum += s.sum;
    t.sumsq += s.sumsq;
  };
  chunked_reduce<St>(trials, 1024, acc, merge, total);
  double mean = total.sum / static_cast<double>(trials);
  double var = total.sumsq / static_cast<double>(trials) - mean * mean;
  Check c;
  c.name = "product_variance_three_unit_factors";
  c.measured = var;
  c.bound = 7.0;
  c.pass = std::abs(var - 7.0) <= 0.05 * 7.0;
  return {c};
}

std::vector<Check> suite_taylor(std::int64_t trials, RngStream rng) {
  std::vector<Check> checks;
  // Derivative growth |f^(n)(a)| <= n! B^n on a +-10 grid, B = 1.7822.
  const double B = 1.7822;
  for (ActKind kind : {ActKind::Softplus, ActKind::Sigmoid}) {
    double worst_ratio = 0.0;
    for (double a = -10.0; a <= 10.0 + 1e-9; a += 0.5) {
      double fact = 1.0, Bn = 1.0;
      for (int n = 0; n <= 10; ++n) {
        if (n > 0) { fact *= n; Bn *= B; }
        double v = std::abs(activation_derivative(kind, a, n));
        worst_ratio = std::max(worst_ratio, v / (fact * Bn));
      }
    }
    Check c;
    c.name = "derivative_growth_" + activation_name(kind);
    c.measured = worst_ratio;
    c.bound = 1.0;
    c.pass = worst_ratio <= 1.0;
    checks.push_back(c);
  }

  // Gated Taylor estimator of softplus at d = 16, sigma = eps = 1/(sqrt(72) B).
  const int d = 16;
  double Bsb = strongly_bounded_B();
  double eps = 1.0 / (std::sqrt(72.0) * Bsb);
  RngStream setup = rng.child(999);
  Vector h(d);
  for (auto& v : h) v = 2.0 * setup.uniform() - 1.0;
  LayerSource prev;
  prev.true_values = {h};
  prev.sigma = eps;
  prev.d = d;
  prev.bits_per_draw = 0;
  prev.draw_table = [h, eps, d](RngStream r) {
    Vector v(h);
    for (int i = 0; i < d; ++i) v[static_cast<std::size_t>(i)] += eps * r.child(static_cast<std::uint64_t>(i)).gaussian();
    return Table{v};
  };
  Table seed = {h};  // within eps of itself

  EstimatorSampler act;
  act.dim = d;
  act.sigma = 1.0;
  act.target.resize(d);
  for (int i = 0; i < d; ++i)
    act.target[static_cast<std::size_t>(i)] = activation_eval(ActKind::Softplus, h[static_cast<std::size_t>(i)]);
  act.sample = [prev, seed](RngStream r) {
    Table t = compress_activation_layer(prev, ActKind::Softplus, seed, r);
    return t[0];
  };
  std::int64_t act_trials = std::max<std::int64_t>(trials / 10, 2000);
  checks.push_back(claim_check("softplus_layer_directional_variance", act, act_trials, 32,
                               rng.child(1)));

  struct St { double sum = 0.0, sumsq = 0.0; };
  St total;
  std::function<void(St&, std::int64_t)> acc = [&](St& st, std::int64_t i) {
    int max_n = 0;
    compress_activation_layer(prev, ActKind::Softplus, seed, rng.child(2).child(static_cast<std::uint64_t>(i)),
                              &max_n);
    st.sum += max_n;
    st.sumsq += static_cast<double>(max_n) * max_n;
  };
  std::function<void(St&, const St&)> merge = [](St& t, const St& s) {
    t.sum += s.sum;
    t.sumsq += s.sumsq;
  };
  chunked_reduce<St>(act_trials, 256, acc, merge, total);
  double mean = total.sum / static_cast<double>(act_trials);
  double var = std::max(0.0, total.sumsq / static_cast<double>(act_trials) - mean * mean);
  double se = std::sqrt(var / static_cast<double>(act_trials));
  Check c;
  c.name = "expected_max_gated_index_d16";
  c.measured = mean;
  c.se = se;
  c.bound = (std::log(16.0) / std::log(3.0) + 4.0) / 2.0 + 3.0 * se;
  c.pass = mean <= c.bound;
  checks.push_back(c);
  return checks;
}

std::vector<Check> suite_kernel(std::int64_t trials, RngStream rng) {
  QuadKernel kernel;
  std::vector<Check> checks;
  Check mass;
  mass.name = "total_mass_49_over_3";
  mass.measured = kernel.total_mass();
  mass.bound = 49.0 / 3.0;
  mass.pass = std::abs(mass.measured - mass.bound) <= 1e-12;
  checks.push_back(mass);
  Check bump;
  bump.name = "bump_value_at_1p5";
  bump.measured = kernel.f(1.5);
  bump.bound = 0.75;
  bump.pass = std::abs(bump.measured - bump.bound) <= 1e-12;
  checks.push_back(bump);

  int idx = 0;
  for (double x : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    struct St { double sum = 0.0, sumsq = 0.0; };
    St total;
    RngStream base = rng.child(static_cast<std::uint64_t>(idx));
    std::function<void(St&, std::int64_t)> acc = [&](St& st, std::int64_t i) {
      RngStream s = base.child(static_cast<std::uint64_t>(i));
      auto [a, b] = kernel.sample(s);
      double v = x - a > 0.0 ? b * (x - a) : 0.0;
      st.sum += v;
      st.sumsq += v * v;
    };
    std::function<void(St&, const St&)> merge = [](St& t, const St& s) {
      t.sum += s.sum;
      t.sumsq += s.sumsq;
    };
    chunked_reduce<St>(trials, 4096, acc, merge, total);
    double mean = total.sum / static_cast<double>(trials);
    double var = std::max(0.0, total.sumsq / static_cast<double>(trials) - mean * mean);
    double se = std::sqrt(var / static_cast<double>(trials));
    Check c;
    c.name = "relu_kernel_identity_x" + std::to_string(idx);
    c.measured = mean;
    c.bound = x * x;
    c.se = se;
    c.pass = std::abs(mean - x * x) <= 3.0 * se + 1e-12;
    checks.push_back(c);
    ++idx;
  }
  return checks;
}

int cmd_verify(const std::string& suite, std::int64_t trials, std::uint64_t seed,
               const std::string& out_path) {
  RngStream rng(seed);
  std::vector<Check> checks;
  if (suite == "sketch") checks = suite_sketch(trials, rng);
  else if (suite == "estimators") checks = suite_estimators(trials, rng);
  else if (suite == "median") checks = suite_median(trials, rng);
  else if (suite == "product") checks = suite_product(trials, rng);
  else if (suite == "taylor") checks = suite_taylor(trials, rng);
  else if (suite == "kernel") checks = suite_kernel(trials, rng);
  else throw InvalidInput("unknown suite: " + suite);

  bool ok = all_pass(checks);
  json report{{"version", kVersion},
              {"config", {{"subcommand", "verify"}, {"suite", suite}, {"trials", trials}, {"seed", seed}}},
              {"checks", checks_json(checks)},
              {"pass", ok}};
  emit_report(report, out_path);
  return ok ? 0 : 2;
}

// ---------------------------------------------------------------- compress

json stage_json(const StageInfo& s) {
  const char* kind = s.kind == StageInfo::Kind::Input ? "input"
                     : s.kind == StageInfo::Kind::Linear ? "linear" : "activation";
  json j{{"kind", kind}, {"layer", s.layer}, {"d", s.d}};
  if (s.kind == StageInfo::Kind::Linear) {
    j["k1"] = s.k1;
    j["k2"] = s.k2;
    j["M_prev"] = s.M_prev;
    j["M_bound"] = s.M_bound;
  } else if (s.kind == StageInfo::Kind::Act) {
    j["k72"] = s.k72;
    j["n0"] = s.n0;
    j["eps"] = s.eps;
    j["M_layer"] = s.M_layer;
    j["seed_bits"] = s.seed_bits;
  }
  return j;
}

json budget_json(const AdlBudget& b) {
  return json{{"n_s", b.n_s},
              {"n", b.n},
              {"per_layer_n", b.per_layer_n},
              {"realized_seed_bits", b.realized_seed_bits},
              {"mean_code_bits", b.mean_code_bits},
              {"per_stage_mean_code_bits", b.per_stage_mean_code_bits},
              {"up_to_universal_constant", b.up_to_universal_constant}};
}

int cmd_compress(const std::string& net_path, const std::string& data_path, int draws,
                 std::uint64_t seed, const std::string& out_path, bool materialize,
                 bool no_seed) {
  NetworkSpec net = network_from_json(read_file(net_path));
  SampleSet A = samples_from_csv(read_file(data_path));
  A.validate();
  net.validate();
  AdlBudget budget = adl_theoretical(net, A.m());

  json report{{"version", kVersion},
              {"config",
               {{"subcommand", "compress"}, {"net", net_path}, {"data", data_path},
                {"draws", draws}, {"seed", seed}, {"materialize", materialize},
                {"no_seed", no_seed}}},
              {"up_to_universal_constant", true}};

  if (draws == 0) {
    report["budget"] = budget_json(budget);
    emit_report(report, out_path);
    std::cout << "theoretical only: n_s=" << budget.n_s << " n=" << budget.n << "\n";
    return 0;
  }

  NetworkCompressor::Options opts;
  opts.materialize_codes = materialize;
  opts.no_seed = no_seed;
  NetworkCompressor comp(net, A, opts);
  budget.realized_seed_bits = comp.seed_bits_total();

  const Table& truth = comp.true_outputs();
  int m = A.m();
  int dt = net.dims.back();
  std::size_t flat = static_cast<std::size_t>(m) * dt;

  // Probe directions for the directional-variance check (unit vectors over the
  // flattened output table; fixed stream independent of the draws).
  const int num_dirs = 16;
  std::vector<Vector> dirs;
  RngStream dir_rng = RngStream(seed).child(0xD1CE);
  for (int u = 0; u < num_dirs; ++u) {
    RngStream s = dir_rng.child(static_cast<std::uint64_t>(u));
    Vector v(flat);
    double n2 = 0.0;
    for (auto& e : v) { e = s.gaussian(); n2 += e * e; }
    for (auto& e : v) e /= std::sqrt(n2);
    dirs.push_back(std::move(v));
  }

  Vector sum(flat, 0.0), sumsq(flat, 0.0);
  Vector dir_sumsq(num_dirs, 0.0), dir_sum4(num_dirs, 0.0);
  double bits_sum = 0.0;
  std::vector<double> stage_bits_sum;
  std::int64_t decode_mismatches = 0;
  int max_taylor = 0;
  RngStream draw_rng = RngStream(seed).child(0xDA);
  for (int t = 0; t < draws; ++t) {
    DrawResult r = comp.draw(draw_rng.child(static_cast<std::uint64_t>(t)));
    if (stage_bits_sum.empty()) stage_bits_sum.assign(r.stage_code_bits.size(), 0.0);
    for (std::size_t s = 0; s < r.stage_code_bits.size(); ++s)
      stage_bits_sum[s] += static_cast<double>(r.stage_code_bits[s]);
    bits_sum += static_cast<double>(r.code_bits);
    max_taylor = std::max(max_taylor, r.max_taylor_index);
    std::size_t p = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < dt; ++j, ++p) {
        double v = r.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        sum[p] += v;
        double e = v - truth[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        sumsq[p] += e * e;
      }
    for (int u = 0; u < num_dirs; ++u) {
      double z = 0.0;
      p = 0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < dt; ++j, ++p)
          z += dirs[static_cast<std::size_t>(u)][p] *
               (r.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                truth[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      dir_sumsq[static_cast<std::size_t>(u)] += z * z;
      dir_sum4[static_cast<std::size_t>(u)] += z * z * z * z;
    }
    if (materialize) {
      DrawResult back = comp.decode(r.code);
      if (back.values != r.values) ++decode_mismatches;
    }
  }

  double T = static_cast<double>(draws);
  double mean_err = 0.0, mean_se = 0.0;
  for (std::size_t p = 0; p < flat; ++p) {
    std::size_t i = p / static_cast<std::size_t>(dt), j = p % static_cast<std::size_t>(dt);
    double mu = sum[p] / T;
    mean_err = std::max(mean_err, std::abs(mu - truth[i][j]));
    mean_se = std::max(mean_se, std::sqrt(sumsq[p] / T / T));
  }
  double worst_var = 0.0, worst_var_se = 0.0;
  for (int u = 0; u < num_dirs; ++u) {
    double v = dir_sumsq[static_cast<std::size_t>(u)] / T;
    if (v > worst_var) {
      worst_var = v;
      double m4 = dir_sum4[static_cast<std::size_t>(u)] / T;
      worst_var_se = std::sqrt(std::max(0.0, m4 - v * v) / T);
    }
  }
  budget.mean_code_bits = bits_sum / T;
  for (double s : stage_bits_sum) budget.per_stage_mean_code_bits.push_back(s / T);
  bool var_ok = worst_var <= 1.0 + 4.0 * worst_var_se;
  bool mean_ok = mean_err <= 4.0 * mean_se + 1e-12;
  bool decode_ok = decode_mismatches == 0;

  json stages = json::array();
  for (const auto& s : comp.stages()) stages.push_back(stage_json(s));
  report["budget"] = budget_json(budget);
  report["stages"] = stages;
  report["checks"] = json{{"mean_error_inf", mean_err},
                          {"mean_se", mean_se},
                          {"unbiasedness_pass", mean_ok},
                          {"worst_directional_var", worst_var},
                          {"var_se", worst_var_se},
                          {"variance_pass", var_ok},
                          {"decode_mismatches", decode_mismatches},
                          {"max_taylor_index", max_taylor},
                          {"bits_ratio_measured_over_theoretical",
                           budget.n > 0 ? budget.mean_code_bits / budget.n : 0.0}};
  emit_report(report, out_path);
  std::cout << "measured bits/draw " << budget.mean_code_bits << " vs theoretical n "
            << budget.n << "; variance check " << (var_ok ? "pass" : "FAIL") << "\n";
  return var_ok && mean_ok && decode_ok ? 0 : 2;
}

// ---------------------------------------------------------------- bound

int cmd_bound(const std::string& net_path, std::int64_t m, double L, double B_loss,
              double delta, double eps, const std::string& out_path) {
  NetworkSpec net = network_from_json(read_file(net_path));
  net.validate();
  AdlBudget b = adl_theoretical(net, m);
  BoundInputs in;
  in.L = L;
  in.B_loss = B_loss;
  in.m = m;
  in.d = net.dims.back();
  in.delta = delta;
  auto [expected, high_prob] = generalization_bound(b.n_s, b.n, in);
  double cover = covering_log_size(b.n_s, b.n, eps, m, net.dims.back());
  json report{{"version", kVersion},
              {"config",
               {{"subcommand", "bound"}, {"net", net_path}, {"m", m}, {"L", L},
                {"B_loss", B_loss}, {"delta", delta}, {"eps", eps}}},
              {"budget", budget_json(b)},
              {"covering_log_size", cover},
              {"expected_representativeness", expected},
              {"high_prob_representativeness", high_prob},
              {"up_to_universal_constant", true}};
  emit_report(report, out_path);
  std::cout << "n_s=" << b.n_s << " n=" << b.n << " log-cover(eps=" << eps << ")=" << cover
            << " rep<=" << expected << " (w.p. 1-delta: " << high_prob << ")\n";
  return 0;
}

// ---------------------------------------------------------------- shatter

int cmd_shatter(int d, int k, int D, int labelings, double B, int n_reps, int relu_checks,
                int attempts, std::uint64_t seed, const std::string& out_path) {
  if (D <= 0) D = static_cast<int>(std::floor(d * k / (8.0 * std::log(static_cast<double>(d)))));
  RngStream rng(seed);
  ShatterInstance inst = make_instance(d, k, D, rng.child(0));
  QuadKernel kernel;

  int feasible = 0, relu_pass = 0, relu_tried = 0;
  double min_margin = 1e300, max_margin = -1e300;
  json fits = json::array();
  for (int l = 0; l < labelings; ++l) {
    RngStream ls = rng.child(1).child(static_cast<std::uint64_t>(l));
    std::vector<int> labels(static_cast<std::size_t>(D));
    for (auto& v : labels) v = ls.bernoulli(0.5) ? 1 : -1;
    FitResult fit = fit_quadratic_shatter(inst, labels, B);
    json entry{{"labeling", l}, {"feasible", fit.feasible}};
    if (!fit.feasible) {
      entry["certificate"] = fit.certificate;
      fits.push_back(entry);
      continue;
    }
    ++feasible;
    for (double mg : fit.margins) {
      min_margin = std::min(min_margin, mg);
      max_margin = std::max(max_margin, mg);
    }
    if (relu_tried < relu_checks) {
      ++relu_tried;
      int found = -1;
      ShatterVerdict verdict;
      ReluRealization relu;
      for (int a = 0; a < attempts; ++a) {
        relu = quad_to_relu_net(fit.q, inst, n_reps, kernel,
                                rng.child(2).child(static_cast<std::uint64_t>(l)).child(static_cast<std::uint64_t>(a)));
        verdict = verify_shattering(inst, labels,
                                    [&](const Vector& x) { return relu.forward(x); });
        if (verdict.pass) { found = a; break; }
      }
      if (found >= 0) ++relu_pass;
      entry["relu_attempts"] = found >= 0 ? found + 1 : attempts;
      entry["relu_pass"] = found >= 0;
      entry["relu_min_margin"] =
          *std::min_element(verdict.margins.begin(), verdict.margins.end());
      entry["hidden_spectral_norm"] = relu.hidden_spectral_norm();
      entry["output_weight_sq_norm"] = relu.output_weight_sq_norm();
    }
    fits.push_back(entry);
  }

  json report{{"version", kVersion},
              {"config",
               {{"subcommand", "shatter"}, {"d", d}, {"k", k}, {"D", D},
                {"labelings", labelings}, {"B", B}, {"n_reps", n_reps},
                {"relu_checks", relu_checks}, {"attempts", attempts}, {"seed", seed}}},
              {"L", inst.L},
              {"labelings_tried", labelings},
              {"feasible_count", feasible},
              {"margin_stats", feasible > 0
                                   ? json{{"min", min_margin}, {"max", max_margin}}
                                   : json(nullptr)},
              {"relu_tried", relu_tried},
              {"relu_pass", relu_pass},
              {"fits", fits}};
  emit_report(report, out_path);
  std::cout << "feasible " << feasible << "/" << labelings << ", relu pass " << relu_pass
            << "/" << relu_tried << "\n";
  return 0;
}

// ---------------------------------------------------------------- enum

int cmd_enum_brackets(int n, const std::string& out_path) {
  if (n < 1 || n > 8) throw InvalidInput("n must be in [1, 8]");
  json rows = json::array();
  std::cout << "n\tcount\t32^n\n";
  double p = 1.0;
  for (int i = 1; i <= n; ++i) {
    p *= 32.0;
    std::int64_t c = count_bracketed(i);
    std::cout << i << "\t" << c << "\t" << static_cast<std::int64_t>(p) << "\n";
    rows.push_back(json{{"n", i}, {"count", c}, {"bound", p}});
  }
  json report{{"version", kVersion},
              {"config", {{"subcommand", "enum-brackets"}, {"n", n}}},
              {"rows", rows}};
  if (!out_path.empty()) emit_report(report, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"approximate-description-length toolkit"};
  app.require_subcommand(1);

  std::string suite, out_path, net_path, data_path;
  std::uint64_t seed = 42;
  std::int64_t trials = 100000;
  int draws = 0, enum_n = 6;
  bool materialize = false, no_seed = false;
  std::int64_t bound_m = 1024;
  double L = 1.0, B_loss = 1.0, delta = 0.05, eps = 1.0;
  int sd = 64, sk = 4, sD = 0, labelings = 100, n_reps = 20000, relu_checks = 10, attempts = 20;
  double sB = 8.0;

  auto* verify = app.add_subcommand("verify", "run a named invariant suite");
  verify->add_option("--suite", suite, "sketch|estimators|median|product|taylor|kernel")->required();
  verify->add_option("--trials", trials);
  verify->add_option("--seed", seed);
  verify->add_option("--out", out_path);

  auto* compress = app.add_subcommand("compress", "compress a network on a sample set");
  compress->add_option("--net", net_path)->required();
  compress->add_option("--data", data_path)->required();
  compress->add_option("--draws", draws);
  compress->add_option("--seed", seed);
  compress->add_option("--out", out_path);
  compress->add_flag("--materialize", materialize, "persist codes and verify decode round-trips");
  compress->add_flag("--no-seed", no_seed, "experimental seedless mode");

  auto* bound = app.add_subcommand("bound", "covering/representativeness calculators");
  bound->add_option("--net", net_path)->required();
  bound->add_option("--m", bound_m);
  bound->add_option("--L", L);
  bound->add_option("--B-loss", B_loss);
  bound->add_option("--delta", delta);
  bound->add_option("--eps", eps);
  bound->add_option("--out", out_path);

  auto* shatter = app.add_subcommand("shatter", "constructive shattering demo");
  shatter->add_option("--d", sd);
  shatter->add_option("--k", sk);
  shatter->add_option("--D", sD, "0 = floor(dk / (8 ln d))");
  shatter->add_option("--labelings", labelings);
  shatter->add_option("--B", sB);
  shatter->add_option("--n-reps", n_reps);
  shatter->add_option("--relu-checks", relu_checks);
  shatter->add_option("--attempts", attempts);
  shatter->add_option("--seed", seed);
  shatter->add_option("--out", out_path);

  auto* enumb = app.add_subcommand("enum-brackets", "exact nested-string counts vs 32^n");
  enumb->add_option("--n", enum_n);
  enumb->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (verify->parsed()) return cmd_verify(suite, trials, seed, out_path);
    if (compress->parsed())
      return cmd_compress(net_path, data_path, draws, seed, out_path, materialize, no_seed);
    if (bound->parsed()) return cmd_bound(net_path, bound_m, L, B_loss, delta, eps, out_path);
    if (shatter->parsed())
      return cmd_shatter(sd, sk, sD, labelings, sB, n_reps, relu_checks, attempts, seed, out_path);
    if (enumb->parsed()) return cmd_enum_brackets(enum_n, out_path);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ContractViolation& e) {
    std::cerr << "contract violation: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
