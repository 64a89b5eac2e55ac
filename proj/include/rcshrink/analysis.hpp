#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rcshrink/denoise.hpp"
#include "rcshrink/dwt.hpp"
#include "rcshrink/errors.hpp"
#include "rcshrink/quadrature.hpp"
#include "rcshrink/rules.hpp"
#include "rcshrink/signals.hpp"
#include "rcshrink/stats.hpp"

namespace rcshrink {

struct ErrorMetrics {
  double mse = 0.0;
  double mae = 0.0;
};

/// Mean squared error and median absolute error of an estimate.
inline ErrorMetrics error_metrics(std::span<const double> f_hat, std::span<const double> f) {
  if (f_hat.size() != f.size()) throw StructuralError("error metrics: estimate and truth differ in length");
  if (f.empty()) throw StructuralError("error metrics of empty vectors");
  std::vector<double> sq(f.size()), ab(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double e = f_hat[i] - f[i];
    sq[i] = e * e;
    ab[i] = std::abs(e);
  }
  return {mean(sq), median(ab)};
}

// ---------------------------------------------------------------------------------------------
// Simulation study

enum class SigmaMode { estimated, truth };

struct SimulationConfig {
  std::vector<TestFunctionName> functions{TestFunctionName::bumps, TestFunctionName::blocks,
                                          TestFunctionName::doppler, TestFunctionName::heavisine};
  std::vector<std::size_t> sizes{128, 512, 2048};
  std::vector<double> snrs{1.0, 3.0, 9.0};
  std::vector<RuleSpec> rules{RuleSpec::raised_cosine(),          RuleSpec::beta(1.0),
                              RuleSpec::beta(5.0),                RuleSpec::soft(PolicyKind::universal),
                              RuleSpec::soft(PolicyKind::fdr),    RuleSpec::soft(PolicyKind::cv),
                              RuleSpec::soft(PolicyKind::sure)};
  int replications = 200;
  std::uint64_t master_seed = 2024;
  int vanishing_moments = 10;
  int primary_level = 0;
  AlphaMode alpha_mode = AlphaMode::fixed;
  double alpha = 0.9;
  double gamma = 2.0;
  SigmaMode sigma_mode = SigmaMode::estimated;
  double signal_sd = 7.0;
  int threads = 0;  // 0: RCSHRINK_THREADS, else hardware concurrency
  QuadratureSpec quad{};

  void validate() const {
    if (replications < 1) throw ParameterError("replications must be at least 1");
    if (functions.empty() || sizes.empty() || snrs.empty() || rules.empty())
      throw ParameterError("simulation grid has an empty axis");
    for (std::size_t n : sizes)
      if (dyadic_exponent(n) < 3) throw ParameterError("simulation sizes must be dyadic and at least 8");
    for (double s : snrs)
      if (!(s > 0.0)) throw ParameterError("simulation SNRs must be positive");
    for (std::size_t n : sizes)
      if (primary_level < 0 || primary_level >= dyadic_exponent(n))
        throw StructuralError("invalid level: J0 = " + std::to_string(primary_level) + " for n = " +
                              std::to_string(n));
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in [0, 1)");
    if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
    if (!(signal_sd > 0.0)) throw ParameterError("signal SD must be positive");
    for (const RuleSpec& r : rules) r.policy.validate();
    build_filter(vanishing_moments);
    quad.validate();
  }
};

struct SimulationRecord {
  TestFunctionName function = TestFunctionName::bumps;
  std::size_t n = 0;
  double snr = 0.0;
  std::string rule;
  int replication = 0;
  double mse = std::numeric_limits<double>::quiet_NaN();
  double mae = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success
};

struct CellSummary {
  TestFunctionName function = TestFunctionName::bumps;
  std::size_t n = 0;
  double snr = 0.0;
  std::string rule;
  int replications = 0;  // successful ones
  double amse = std::numeric_limits<double>::quiet_NaN();
  double sd_mse = std::numeric_limits<double>::quiet_NaN();
  double amae = std::numeric_limits<double>::quiet_NaN();
  double sd_mae = std::numeric_limits<double>::quiet_NaN();
  bool complete = false;
};

struct SimulationReport {
  std::vector<SimulationRecord> records;
  std::vector<CellSummary> cells;

  bool complete() const {
    return std::all_of(cells.begin(), cells.end(), [](const CellSummary& c) { return c.complete; });
  }
  const CellSummary* find(TestFunctionName f, std::size_t n, double snr, const std::string& rule) const {
    for (const auto& c : cells)
      if (c.function == f && c.n == n && c.snr == snr && c.rule == rule) return &c;
    return nullptr;
  }
};

/// Worker count: explicit request, else the RCSHRINK_THREADS environment variable, else the
/// hardware concurrency.
inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RCSHRINK_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 1024));
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace detail {

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

// Stable identifier of a (function, n, snr) scenario.
inline std::uint64_t scenario_hash(TestFunctionName f, std::size_t n, double snr) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  const std::string name = to_string(f);
  h = fnv1a(h, name.data(), name.size());
  const std::uint64_t n64 = n;
  h = fnv1a(h, &n64, sizeof n64);
  std::uint64_t bits = 0;
  std::memcpy(&bits, &snr, sizeof bits);
  return fnv1a(h, &bits, sizeof bits);
}

}  // namespace detail

/// Noise stream identifier for one replication of a scenario.
inline std::uint64_t replication_stream(TestFunctionName f, std::size_t n, double snr, int replication) {
  return mix64(detail::scenario_hash(f, n, snr) ^ mix64(static_cast<std::uint64_t>(replication)));
}

/// Runs the full grid. Every rule sees the same noisy sample within a replication.
/// Results do not depend on the number of worker threads.
inline SimulationReport run_simulation(const SimulationConfig& cfg) {
  cfg.validate();
  const QuadratureFilter filter = build_filter(cfg.vanishing_moments);
  const std::size_t n_rules = cfg.rules.size();
  const auto R = static_cast<std::size_t>(cfg.replications);

  struct Scenario {
    TestFunctionName function;
    std::size_t n;
    double snr;
    const std::vector<double>* clean;
  };
  std::map<std::pair<TestFunctionName, std::size_t>, std::vector<double>> clean;
  for (auto f : cfg.functions)
    for (std::size_t n : cfg.sizes) clean[{f, n}] = make_test_signal(f, n, cfg.signal_sd).values;
  std::vector<Scenario> scenarios;
  for (auto f : cfg.functions)
    for (std::size_t n : cfg.sizes)
      for (double snr : cfg.snrs) scenarios.push_back({f, n, snr, &clean.at({f, n})});

  // slot layout: scenario-major, then rule, then replication
  SimulationReport report;
  report.records.resize(scenarios.size() * n_rules * R);
  auto slot = [&](std::size_t s, std::size_t r, std::size_t rep) -> SimulationRecord& {
    return report.records[(s * n_rules + r) * R + rep];
  };

  auto run_task = [&](std::size_t task) {
    const std::size_t s = task / R, rep = task % R;
    const Scenario& sc = scenarios[s];
    for (std::size_t r = 0; r < n_rules; ++r) {
      SimulationRecord& rec = slot(s, r, rep);
      rec.function = sc.function;
      rec.n = sc.n;
      rec.snr = sc.snr;
      rec.rule = cfg.rules[r].name();
      rec.replication = static_cast<int>(rep);
    }
    try {
      const NoisySample sample = add_gaussian_noise(
          *sc.clean, sc.snr, cfg.master_seed, replication_stream(sc.function, sc.n, sc.snr, static_cast<int>(rep)));
      const WaveletDecomposition empirical = forward(sample.y, filter, cfg.primary_level);
      for (std::size_t r = 0; r < n_rules; ++r) {
        SimulationRecord& rec = slot(s, r, rep);
        try {
          DenoiseOptions opt;
          opt.rule = cfg.rules[r];
          opt.primary_level = cfg.primary_level;
          opt.alpha_mode = cfg.alpha_mode;
          opt.alpha = cfg.alpha;
          opt.gamma = cfg.gamma;
          opt.quad = cfg.quad;
          if (cfg.sigma_mode == SigmaMode::truth) opt.sigma = sample.sigma_true;
          const DenoiseResult res = denoise_decomposition(empirical, filter, opt);
          const ErrorMetrics m = error_metrics(res.f_hat, *sc.clean);
          rec.mse = m.mse;
          rec.mae = m.mae;
        } catch (const Error& e) {
          rec.error = e.what();
        }
      }
    } catch (const Error& e) {
      for (std::size_t r = 0; r < n_rules; ++r) slot(s, r, rep).error = e.what();
    }
  };

  const std::size_t n_tasks = scenarios.size() * R;
  const int workers = static_cast<int>(std::min<std::size_t>(resolve_thread_count(cfg.threads), n_tasks));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next.fetch_add(1); t < n_tasks; t = next.fetch_add(1)) run_task(t);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (std::size_t s = 0; s < scenarios.size(); ++s)
    for (std::size_t r = 0; r < n_rules; ++r) {
      CellSummary c;
      c.function = scenarios[s].function;
      c.n = scenarios[s].n;
      c.snr = scenarios[s].snr;
      c.rule = cfg.rules[r].name();
      std::vector<double> mse, mae;
      for (std::size_t rep = 0; rep < R; ++rep) {
        const SimulationRecord& rec = slot(s, r, rep);
        if (rec.error.empty() && std::isfinite(rec.mse) && std::isfinite(rec.mae)) {
          mse.push_back(rec.mse);
          mae.push_back(rec.mae);
        }
      }
      c.replications = static_cast<int>(mse.size());
      c.complete = mse.size() == R;
      if (!mse.empty()) {
        c.amse = mean(mse);
        c.sd_mse = sample_sd(mse);
        c.amae = mean(mae);
        c.sd_mae = sample_sd(mae);
      }
      report.cells.push_back(c);
    }
  return report;
}

// ---------------------------------------------------------------------------------------------
// Risk engine

struct RiskSpec {
  int hermite_nodes = 61;
  QuadratureSpec rule_quad{};
  double outer_tolerance = 1e-6;  // Bayes-risk integral over the prior

  void validate() const {
    if (hermite_nodes < 2 || hermite_nodes > 512) throw ParameterError("Gauss-Hermite order must lie in [2, 512]");
    rule_quad.validate();
    if (!(outer_tolerance > 0.0)) throw ParameterError("outer tolerance must be positive");
  }
};

struct RiskPoint {
  double mean = 0.0;  // E[delta(d)]
  double bias_sq = 0.0;
  double variance = 0.0;
  double risk = 0.0;
};

/// Squared bias, variance and risk of the raised-cosine rule at a fixed theta.
inline RiskPoint classical_risk(double theta, const RaisedCosineParams& p, const RiskSpec& spec = {}) {
  p.validate();
  spec.validate();
  if (!std::isfinite(theta)) throw ParameterError("theta must be finite");
  const GaussRule& gh = gauss_hermite_normal(spec.hermite_nodes);
  double m1 = 0.0, m2 = 0.0, risk = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
    const double delta = raised_cosine_rule(theta + p.sigma * gh.nodes[i], p, spec.rule_quad);
    m1 += gh.weights[i] * delta;
    m2 += gh.weights[i] * delta * delta;
    risk += gh.weights[i] * (delta - theta) * (delta - theta);
  }
  RiskPoint out;
  out.mean = m1;
  out.bias_sq = (m1 - theta) * (m1 - theta);
  out.variance = std::max(0.0, m2 - m1 * m1);
  out.risk = risk;
  return out;
}

struct RiskCurves {
  RaisedCosineParams params{};
  std::vector<double> theta_grid;
  std::vector<double> bias_sq;
  std::vector<double> variance;
  std::vector<double> risk;
};

inline RiskCurves risk_curves(const RaisedCosineParams& p, std::span<const double> theta_grid,
                              const RiskSpec& spec = {}) {
  RiskCurves c;
  c.params = p;
  c.theta_grid.assign(theta_grid.begin(), theta_grid.end());
  for (double theta : theta_grid) {
    const RiskPoint r = classical_risk(theta, p, spec);
    c.bias_sq.push_back(r.bias_sq);
    c.variance.push_back(r.variance);
    c.risk.push_back(r.risk);
  }
  return c;
}

/// Prior-averaged risk alpha R(0) + (1 - alpha) E_g[R(theta)].
inline double bayes_risk(const RaisedCosineParams& p, const RiskSpec& spec = {}) {
  p.validate();
  spec.validate();
  const double r0 = classical_risk(0.0, p, spec).risk;
  QuadratureSpec outer;
  outer.relative_tolerance = spec.outer_tolerance;
  const std::array<double, 3> bp{0.0, 0.5 * p.tau, p.tau};
  // R and g are both even in theta
  const auto slab = integrate_adaptive<1>(
      [&](double theta) {
        return std::array<double, 1>{2.0 * classical_risk(theta, p, spec).risk * raised_cosine_pdf(theta, p.tau)};
      },
      std::span<const double>(bp), outer);
  return p.alpha * r0 + (1.0 - p.alpha) * slab.value[0];
}

}  // namespace rcshrink
