#pragma once

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rcshrink/rcshrink.hpp"

namespace rcshrink::cli {

enum ExitCode : int { ok = 0, usage = 1, data = 2, numerical = 3 };

namespace detail {

using nlohmann::json;

inline std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline ColumnSelector parse_column(const std::string& s) {
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) return std::stoull(s);
  return s;
}

inline void emit(const std::optional<std::string>& path, const std::string& content, std::ostream& out) {
  if (path)
    write_file_atomic(*path, content);
  else
    out << content;
}

inline bool wants_json(const std::string& format, const std::optional<std::string>& path) {
  if (format == "json") return true;
  if (format == "csv") return false;
  return path && path->size() >= 5 && path->compare(path->size() - 5, 5, ".json") == 0;
}

// commas inside parentheses belong to beta(a,a)
inline std::vector<std::string> split_rules(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
      continue;
    }
    depth += c == '(' ? 1 : c == ')' ? -1 : 0;
    cur += c;
  }
  out.push_back(cur);
  return out;
}

struct TestfunArgs {
  std::string name;
  std::size_t n = 1024;
  double sd = 7.0;
  bool raw = false;
  std::optional<double> snr;
  std::uint64_t seed = 2024;
  std::optional<std::string> out;
};

inline int run_testfun(const TestfunArgs& a, std::ostream& out, std::ostream& err) {
  const TestFunctionName name = parse_test_function(a.name);
  const TestFunction tf = a.raw ? dj_function(name, a.n) : make_test_signal(name, a.n, a.sd);
  json audit{{"command", "testfun"}, {"name", a.name}, {"n", a.n}, {"sd", a.raw ? json(nullptr) : json(a.sd)}};
  if (a.snr) audit.update({{"snr", *a.snr}, {"seed", a.seed}});
  audit["out"] = a.out ? json(*a.out) : json("-");
  err << audit.dump() << '\n';

  std::ostringstream csv;
  if (a.snr) {
    const NoisySample s = add_gaussian_noise(tf.values, *a.snr, a.seed);
    csv << "x,f,y\n";
    for (std::size_t i = 0; i < tf.values.size(); ++i)
      csv << format_double(tf.x[i]) << ',' << format_double(tf.values[i]) << ',' << format_double(s.y[i]) << '\n';
  } else {
    csv << "x,f\n";
    for (std::size_t i = 0; i < tf.values.size(); ++i)
      csv << format_double(tf.x[i]) << ',' << format_double(tf.values[i]) << '\n';
  }
  emit(a.out, csv.str(), out);
  return ok;
}

struct DenoiseArgs {
  std::string in;
  std::string column = "0";
  std::string rule = "raised-cosine";
  std::string policy = "universal";
  std::optional<std::string> scope;
  double q = 0.05;
  double alpha = 0.9;
  std::optional<double> gamma;
  double a = 1.0;
  int wavelet = 10;
  int j0 = 3;
  std::optional<double> sigma;
  std::string dyadic = "error";
  double tolerance = 1e-10;
  std::string out;
  std::optional<std::string> diagnostics;
  bool alpha_given = false;
};

inline RuleSpec denoise_rule(const DenoiseArgs& a) {
  if (a.rule == "raised-cosine") return RuleSpec::raised_cosine();
  if (a.rule == "beta") return RuleSpec::beta(a.a);
  if (a.rule == "uniform-slab") return parse_rule_spec("uniform-slab");
  if (a.rule == "soft") {
    RuleSpec r = RuleSpec::soft(parse_policy_kind(a.policy), a.q);
    if (a.scope == "by-level")
      r.policy.scope = PolicyScope::by_level;
    else if (a.scope == "global")
      r.policy.scope = PolicyScope::global;
    else if (a.scope)
      throw ParameterError("unknown scope '" + *a.scope + "' (expected global or by-level)");
    r.policy.validate();
    return r;
  }
  throw ParameterError("unknown rule '" + a.rule + "' (expected raised-cosine, beta, uniform-slab or soft)");
}

inline json coefficients_json(const DenoiseResult& r) {
  json levels = json::array();
  for (int j = r.empirical.primary_level; j < r.empirical.num_levels; ++j) {
    const auto e = r.empirical.level(j), s = r.shrunk.level(j);
    std::size_t zeroed = 0;
    for (double v : s) zeroed += v == 0.0 ? 1 : 0;
    levels.push_back({{"level", j},
                      {"count", e.size()},
                      {"zeroed", zeroed},
                      {"empirical", std::vector<double>(e.begin(), e.end())},
                      {"shrunk", std::vector<double>(s.begin(), s.end())}});
  }
  return levels;
}

inline int run_denoise(const DenoiseArgs& a, std::ostream& out, std::ostream& err) {
  if (a.gamma && a.alpha_given) throw ParameterError("--alpha and --gamma are mutually exclusive");
  DenoiseOptions opt;
  opt.rule = denoise_rule(a);
  opt.primary_level = a.j0;
  opt.alpha = a.alpha;
  if (a.gamma) {
    opt.alpha_mode = AlphaMode::by_level;
    opt.gamma = *a.gamma;
  }
  opt.sigma = a.sigma;
  opt.quad.relative_tolerance = a.tolerance;
  opt.quad.validate();
  const DyadicPolicy dyadic = parse_dyadic_policy(a.dyadic);
  if (!(opt.alpha >= 0.0 && opt.alpha < 1.0)) throw ParameterError("alpha must lie in [0, 1)");

  json audit{{"command", "denoise"},
             {"in", a.in},
             {"column", a.column},
             {"rule", opt.rule.name()},
             {"wavelet", a.wavelet},
             {"j0", a.j0},
             {"dyadic", a.dyadic},
             {"tolerance", a.tolerance},
             {"sigma", a.sigma ? json(*a.sigma) : json("estimated")},
             {"out", a.out},
             {"diagnostics", a.diagnostics ? json(*a.diagnostics) : json(nullptr)}};
  if (opt.rule.bayesian()) {
    audit["alpha"] = a.gamma ? json("level") : json(a.alpha);
    if (a.gamma) audit["gamma"] = *a.gamma;
    if (a.rule == "beta") audit["a"] = a.a;
  } else {
    audit["policy"] = to_string(opt.rule.policy.kind);
    audit["scope"] = opt.rule.policy.effective_scope() == PolicyScope::global ? "global" : "by-level";
    if (opt.rule.policy.kind == PolicyKind::fdr) audit["q"] = a.q;
  }
  err << audit.dump() << '\n';

  const QuadratureFilter filter = build_filter(a.wavelet);
  const std::vector<double> raw = load_series(a.in, parse_column(a.column));
  const DyadicSeries series = to_dyadic(raw, dyadic);
  const DenoiseResult res = denoise(series.values, filter, opt);
  const std::vector<double> f_hat = series.restore(res.f_hat);
  const std::vector<double> y = series.restore(series.values);

  std::ostringstream csv;
  csv << "y,fhat\n";
  for (std::size_t i = 0; i < f_hat.size(); ++i) csv << format_double(y[i]) << ',' << format_double(f_hat[i]) << '\n';
  write_file_atomic(a.out, csv.str());

  if (a.diagnostics) {
    json diag{{"n", series.values.size()},
              {"original_length", series.original_length},
              {"dyadic", a.dyadic},
              {"wavelet", a.wavelet},
              {"j0", a.j0},
              {"rule", opt.rule.name()},
              {"sigma_hat", res.sigma_estimated},
              {"sigma_used", res.sigma_used},
              {"tau_hat", res.tau_hat},
              {"snr_hat", res.sigma_used > 0.0 ? json(estimate_snr(f_hat, res.sigma_used)) : json(nullptr)},
              {"fallback_count", res.fallback_count},
              {"scaling", res.empirical.scaling},
              {"levels", coefficients_json(res)}};
    json alpha = json::object(), lambda = json::object();
    for (const auto& [j, v] : res.alpha_by_level) alpha[std::to_string(j)] = v;
    for (const auto& [j, v] : res.lambda_by_level) lambda[std::to_string(j)] = v;
    if (opt.rule.bayesian())
      diag["alpha_by_level"] = alpha;
    else
      diag["lambda_by_level"] = lambda;
    write_file_atomic(*a.diagnostics, diag.dump(2) + "\n");
  }
  out << "denoised " << f_hat.size() << " values: sigma_hat=" << fmt(res.sigma_estimated)
      << " tau_hat=" << fmt(res.tau_hat) << '\n';
  return ok;
}

struct SimulateArgs {
  std::vector<std::string> functions{"bumps", "blocks", "doppler", "heavisine"};
  std::vector<std::size_t> sizes{128, 512, 2048};
  std::vector<double> snrs{1.0, 3.0, 9.0};
  std::string rules = "raised-cosine,beta(1,1),beta(5,5),universal,fdr,cv,sure";
  int replications = 200;
  std::uint64_t seed = 2024;
  int wavelet = 10;
  int j0 = 0;
  double alpha = 0.9;
  std::optional<double> gamma;
  std::string sigma_mode = "estimated";
  double q = 0.05;
  int threads = 0;
  std::string format = "auto";
  std::optional<std::string> out;
  std::optional<std::string> records;
};

inline int run_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  SimulationConfig cfg;
  cfg.functions.clear();
  for (const auto& f : a.functions) cfg.functions.push_back(parse_test_function(f));
  cfg.sizes = a.sizes;
  cfg.snrs = a.snrs;
  cfg.rules.clear();
  for (const auto& r : split_rules(a.rules)) {
    RuleSpec spec = parse_rule_spec(r);
    spec.policy.q = a.q;
    cfg.rules.push_back(spec);
  }
  cfg.replications = a.replications;
  cfg.master_seed = a.seed;
  cfg.vanishing_moments = a.wavelet;
  cfg.primary_level = a.j0;
  cfg.alpha = a.alpha;
  if (a.gamma) {
    cfg.alpha_mode = AlphaMode::by_level;
    cfg.gamma = *a.gamma;
  }
  if (a.sigma_mode == "true")
    cfg.sigma_mode = SigmaMode::truth;
  else if (a.sigma_mode != "estimated")
    throw ParameterError("unknown sigma mode '" + a.sigma_mode + "' (expected estimated or true)");
  cfg.threads = a.threads;
  cfg.validate();

  std::vector<std::string> rule_names;
  for (const auto& r : cfg.rules) rule_names.push_back(r.name());
  json snrs = json::array();
  for (double s : cfg.snrs) snrs.push_back(std::isinf(s) ? json("inf") : json(s));
  err << json{{"command", "simulate"},
              {"functions", a.functions},
              {"sizes", cfg.sizes},
              {"snrs", snrs},
              {"rules", rule_names},
              {"replications", cfg.replications},
              {"seed", cfg.master_seed},
              {"wavelet", cfg.vanishing_moments},
              {"j0", cfg.primary_level},
              {"alpha", a.gamma ? json("level") : json(cfg.alpha)},
              {"gamma", a.gamma ? json(*a.gamma) : json(nullptr)},
              {"sigma_mode", a.sigma_mode},
              {"q", a.q},
              {"threads", resolve_thread_count(cfg.threads)},
              {"out", a.out ? json(*a.out) : json("-")},
              {"records", a.records ? json(*a.records) : json(nullptr)}}
             .dump()
      << '\n';

  const SimulationReport report = run_simulation(cfg);
  if (wants_json(a.format, a.out)) {
    emit(a.out, to_json(report).dump(2) + "\n", out);
  } else {
    std::ostringstream csv;
    write_summary_csv(report, csv);
    emit(a.out, csv.str(), out);
  }
  if (a.records) {
    std::ostringstream csv;
    write_records_csv(report, csv);
    write_file_atomic(*a.records, csv.str());
  }
  if (!report.complete()) {
    for (const auto& c : report.cells)
      if (!c.complete)
        err << "warning: cell " << to_string(c.function) << "/" << c.n << "/" << format_double(c.snr) << "/"
            << c.rule << " completed " << c.replications << " of " << cfg.replications << " replications\n";
  }
  return ok;
}

struct RiskArgs {
  double alpha = 0.9;
  double tau = 3.0;
  double sigma = 1.0;
  std::optional<double> theta_min, theta_max;
  int points = 161;
  int hermite = 61;
  std::string format = "auto";
  std::optional<std::string> out;
};

inline int run_risk(const RiskArgs& a, std::ostream& out, std::ostream& err) {
  const RaisedCosineParams p{a.alpha, a.tau, a.sigma};
  p.validate();
  const double lo = a.theta_min.value_or(-2.0 * a.tau), hi = a.theta_max.value_or(2.0 * a.tau);
  if (a.points < 1) throw ParameterError("--points must be at least 1");
  if (!(hi >= lo)) throw ParameterError("--theta-max must not be below --theta-min");
  RiskSpec spec;
  spec.hermite_nodes = a.hermite;
  spec.validate();
  err << json{{"command", "risk"},   {"alpha", a.alpha}, {"tau", a.tau},       {"sigma", a.sigma},
              {"theta_min", lo},     {"theta_max", hi},  {"points", a.points}, {"hermite", a.hermite},
              {"out", a.out ? json(*a.out) : json("-")}}
             .dump()
      << '\n';
  std::vector<double> grid(static_cast<std::size_t>(a.points));
  for (int i = 0; i < a.points; ++i) grid[i] = a.points == 1 ? lo : lo + (hi - lo) * i / (a.points - 1);
  const RiskCurves curves = risk_curves(p, grid, spec);
  if (wants_json(a.format, a.out)) {
    emit(a.out, to_json(curves).dump(2) + "\n", out);
  } else {
    std::ostringstream csv;
    write_curves_csv(curves, csv);
    emit(a.out, csv.str(), out);
  }
  return ok;
}

struct BayesRiskArgs {
  std::vector<double> alphas{0.9};
  std::vector<double> taus{3.0};
  double sigma = 1.0;
  int hermite = 61;
  std::optional<std::string> out;
};

inline int run_bayes_risk(const BayesRiskArgs& a, std::ostream& out, std::ostream& err) {
  RiskSpec spec;
  spec.hermite_nodes = a.hermite;
  spec.validate();
  for (double al : a.alphas)
    for (double t : a.taus) RaisedCosineParams{al, t, a.sigma}.validate();
  err << json{{"command", "bayes-risk"}, {"alpha", a.alphas},     {"tau", a.taus},
              {"sigma", a.sigma},        {"hermite", a.hermite}, {"out", a.out ? json(*a.out) : json("-")}}
             .dump()
      << '\n';
  std::ostringstream text;
  if (a.alphas.size() == 1 && a.taus.size() == 1) {
    text << fmt(bayes_risk({a.alphas[0], a.taus[0], a.sigma}, spec), "%.6f") << '\n';
  } else {
    text << "alpha,tau,sigma,bayes_risk\n";
    for (double t : a.taus)
      for (double al : a.alphas)
        text << format_double(al) << ',' << format_double(t) << ',' << format_double(a.sigma) << ','
             << format_double(bayes_risk({al, t, a.sigma}, spec)) << '\n';
  }
  emit(a.out, text.str(), out);
  return ok;
}

}  // namespace detail

/// Parses `argv` and runs one subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Wavelet shrinkage with raised-cosine and beta spike-and-slab priors", "rcshrink"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  detail::TestfunArgs tf;
  auto* testfun = app.add_subcommand("testfun", "Sample a Donoho-Johnstone test function to CSV");
  testfun->add_option("--name", tf.name, "bumps, blocks, doppler or heavisine")->required();
  testfun->add_option("--n", tf.n, "Dyadic sample size")->capture_default_str();
  testfun->add_option("--sd", tf.sd, "Target population standard deviation")->capture_default_str();
  testfun->add_flag("--raw", tf.raw, "Skip the rescaling to --sd");
  testfun->add_option("--snr", tf.snr, "Also emit a noisy column y at this SNR");
  testfun->add_option("--seed", tf.seed, "Noise seed")->capture_default_str();
  testfun->add_option("--out", tf.out, "Output CSV (default: standard output)");

  detail::DenoiseArgs dn;
  auto* den = app.add_subcommand("denoise", "Denoise one column of a delimited text file");
  den->add_option("--in", dn.in, "Input file (comma, semicolon or whitespace delimited)")->required();
  den->add_option("--column", dn.column, "Column index (0-based) or header name")->capture_default_str();
  den->add_option("--rule", dn.rule, "raised-cosine, beta, uniform-slab or soft")->capture_default_str();
  den->add_option("--policy", dn.policy, "Soft-threshold policy: universal, fdr, cv or sure")->capture_default_str();
  den->add_option("--scope", dn.scope,
                 "Threshold scope: global or by-level (default: by-level for sure, global otherwise)");
  den->add_option("--q", dn.q, "FDR level")->capture_default_str();
  auto* alpha_opt = den->add_option("--alpha", dn.alpha, "Prior weight of the point mass")->capture_default_str();
  den->add_option("--gamma", dn.gamma, "Use level-dependent alpha 1 - (j - J0 + 1)^-gamma");
  den->add_option("--a", dn.a, "Beta slab shape")->capture_default_str();
  den->add_option("--wavelet", dn.wavelet, "Daubechies vanishing moments (1..10)")->capture_default_str();
  den->add_option("--j0", dn.j0, "Primary resolution level")->capture_default_str();
  den->add_option("--sigma", dn.sigma, "Known noise level (default: MAD estimate)");
  den->add_option("--dyadic", dn.dyadic, "Non-dyadic input: error, truncate or reflect-pad")->capture_default_str();
  den->add_option("--tolerance", dn.tolerance, "Relative quadrature tolerance")->capture_default_str();
  den->add_option("--out", dn.out, "Output CSV with columns y,fhat")->required();
  den->add_option("--diagnostics", dn.diagnostics, "Diagnostics JSON");

  detail::SimulateArgs sm;
  auto* sim = app.add_subcommand("simulate", "Replicated simulation over functions x sizes x SNRs x rules");
  sim->add_option("--functions", sm.functions, "Comma-separated test functions")->delimiter(',')->capture_default_str();
  sim->add_option("--sizes", sm.sizes, "Comma-separated dyadic sizes")->delimiter(',')->capture_default_str();
  sim->add_option("--snrs", sm.snrs, "Comma-separated SNRs (inf: noiseless)")->delimiter(',')->capture_default_str();
  sim->add_option("--rules", sm.rules, "raised-cosine, beta(a,a), uniform-slab, universal, fdr, cv, sure")
      ->capture_default_str();
  sim->add_option("--replications", sm.replications, "Replications per cell")->capture_default_str();
  sim->add_option("--seed", sm.seed, "Master seed")->capture_default_str();
  sim->add_option("--wavelet", sm.wavelet, "Daubechies vanishing moments (1..10)")->capture_default_str();
  sim->add_option("--j0", sm.j0, "Primary resolution level")->capture_default_str();
  sim->add_option("--alpha", sm.alpha, "Fixed prior weight for the Bayesian rules")->capture_default_str();
  sim->add_option("--gamma", sm.gamma, "Use level-dependent alpha with this gamma");
  sim->add_option("--sigma-mode", sm.sigma_mode, "estimated or true")->capture_default_str();
  sim->add_option("--q", sm.q, "FDR level")->capture_default_str();
  sim->add_option("--threads", sm.threads, "Worker threads (0: RCSHRINK_THREADS or all cores)")
      ->capture_default_str();
  sim->add_option("--format", sm.format, "Summary format: csv, json or auto (by --out extension)")
      ->capture_default_str();
  sim->add_option("--out", sm.out, "Summary output (default: standard output)");
  sim->add_option("--records", sm.records, "Per-replication CSV");

  detail::RiskArgs rk;
  auto* risk = app.add_subcommand("risk", "Squared bias, variance and risk of the raised-cosine rule over theta");
  risk->add_option("--alpha", rk.alpha)->capture_default_str();
  risk->add_option("--tau", rk.tau)->capture_default_str();
  risk->add_option("--sigma", rk.sigma)->capture_default_str();
  risk->add_option("--theta-min", rk.theta_min, "Grid start (default -2 tau)");
  risk->add_option("--theta-max", rk.theta_max, "Grid end (default 2 tau)");
  risk->add_option("--points", rk.points, "Grid points")->capture_default_str();
  risk->add_option("--hermite", rk.hermite, "Gauss-Hermite nodes")->capture_default_str();
  risk->add_option("--format", rk.format, "csv, json or auto (by --out extension)")->capture_default_str();
  risk->add_option("--out", rk.out, "Output file (default: standard output)");

  detail::BayesRiskArgs br;
  auto* bayes = app.add_subcommand("bayes-risk", "Bayes risk of the raised-cosine rule");
  bayes->add_option("--alpha", br.alphas, "Comma-separated alpha values")->delimiter(',')->capture_default_str();
  bayes->add_option("--tau", br.taus, "Comma-separated tau values")->delimiter(',')->capture_default_str();
  bayes->add_option("--sigma", br.sigma)->capture_default_str();
  bayes->add_option("--hermite", br.hermite, "Gauss-Hermite nodes")->capture_default_str();
  bayes->add_option("--out", br.out, "Output file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }
  dn.alpha_given = alpha_opt->count() > 0;

  try {
    if (*testfun) return detail::run_testfun(tf, out, err);
    if (*den) return detail::run_denoise(dn, out, err);
    if (*sim) return detail::run_simulate(sm, out, err);
    if (*risk) return detail::run_risk(rk, out, err);
    if (*bayes) return detail::run_bayes_risk(br, out, err);
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return numerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return data;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return data;
  }
  return usage;
}

}  // namespace rcshrink::cli
