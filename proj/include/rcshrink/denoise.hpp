#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rcshrink/dwt.hpp"
#include "rcshrink/errors.hpp"
#include "rcshrink/policies.hpp"
#include "rcshrink/quadrature.hpp"
#include "rcshrink/rules.hpp"

namespace rcshrink {

enum class RuleFamily { raised_cosine, beta, uniform_slab, soft };

/// Which rule to run and how its free parameter is chosen.
struct RuleSpec {
  RuleFamily family = RuleFamily::raised_cosine;
  double beta_shape = 1.0;  // beta only
  ThresholdPolicy policy{};  // soft only

  bool bayesian() const noexcept { return family != RuleFamily::soft; }

  std::string name() const {
    switch (family) {
      case RuleFamily::raised_cosine: return "raised-cosine";
      case RuleFamily::uniform_slab: return "uniform-slab";
      case RuleFamily::soft: {
        std::string n = to_string(policy.kind);
        if (policy.effective_scope() != ThresholdPolicy::default_scope(policy.kind))
          n += policy.effective_scope() == PolicyScope::global ? "-global" : "-by-level";
        return n;
      }
      case RuleFamily::beta: {
        char buf[64];
        std::snprintf(buf, sizeof buf, "beta(%g,%g)", beta_shape, beta_shape);
        return buf;
      }
    }
    return "?";
  }

  static RuleSpec raised_cosine() { return {}; }
  static RuleSpec beta(double a) { return {RuleFamily::beta, a, {}}; }
  static RuleSpec soft(PolicyKind kind, double q = 0.05) { return {RuleFamily::soft, 1.0, {kind, q, std::nullopt}}; }
};

/// Accepts raised-cosine, uniform-slab, beta(a,a), beta(a), and the soft policies universal, fdr,
/// cv and sure, optionally prefixed by soft- and suffixed by -global or -by-level.
inline RuleSpec parse_rule_spec(const std::string& s) {
  if (s == "raised-cosine") return RuleSpec::raised_cosine();
  if (s == "uniform-slab") return {RuleFamily::uniform_slab, 1.0, {}};
  if (s.rfind("beta(", 0) == 0 && s.back() == ')') {
    const std::string inner = s.substr(5, s.size() - 6);
    const auto comma = inner.find(',');
    const std::string first = inner.substr(0, comma);
    char* end = nullptr;
    const double a = std::strtod(first.c_str(), &end);
    bool ok = !first.empty() && end == first.c_str() + first.size() && a > 0.0 && std::isfinite(a);
    if (ok && comma != std::string::npos) {
      const std::string second = inner.substr(comma + 1);
      const double b = std::strtod(second.c_str(), &end);
      ok = end == second.c_str() + second.size() && b == a;
    }
    if (!ok) throw ParameterError("rule '" + s + "': expected beta(a,a) with a positive shape a");
    return RuleSpec::beta(a);
  }
  std::string policy = s.rfind("soft-", 0) == 0 ? s.substr(5) : s;
  std::optional<PolicyScope> scope;
  for (const auto& [suffix, sc] : {std::pair{"-global", PolicyScope::global}, {"-by-level", PolicyScope::by_level}}) {
    const std::string suf = suffix;
    if (policy.size() > suf.size() && policy.compare(policy.size() - suf.size(), suf.size(), suf) == 0) {
      policy.resize(policy.size() - suf.size());
      scope = sc;
    }
  }
  try {
    RuleSpec r = RuleSpec::soft(parse_policy_kind(policy));
    r.policy.scope = scope;
    r.policy.validate();
    return r;
  } catch (const ParameterError&) {
    throw ParameterError("unknown rule '" + s +
                         "' (expected raised-cosine, beta(a,a), uniform-slab, universal, fdr, cv, sure or sure-global)");
  }
}

enum class AlphaMode { fixed, by_level };

struct DenoiseOptions {
  RuleSpec rule{};
  int primary_level = 3;
  AlphaMode alpha_mode = AlphaMode::fixed;
  double alpha = 0.9;
  double gamma = 2.0;
  std::optional<double> sigma;  // known noise level; estimated from the finest level otherwise
  QuadratureSpec quad{};
};

struct DenoiseResult {
  WaveletDecomposition empirical;
  WaveletDecomposition shrunk;
  double sigma_estimated = 0.0;
  double sigma_used = 0.0;
  double tau_hat = 0.0;
  std::map<int, double> alpha_by_level;   // Bayesian rules
  std::map<int, double> lambda_by_level;  // soft rule
  std::size_t fallback_count = 0;
  std::vector<double> f_hat;
};

/// Elicits hyperparameters from `empirical`, shrinks every detail level and inverts.
inline DenoiseResult denoise_decomposition(const WaveletDecomposition& empirical, const QuadratureFilter& filter,
                                           const DenoiseOptions& opt) {
  empirical.validate();
  DenoiseResult r;
  r.empirical = empirical;
  r.sigma_estimated = estimate_sigma(empirical);
  r.sigma_used = opt.sigma.value_or(r.sigma_estimated);
  r.tau_hat = elicit_tau(empirical);
  if (opt.sigma && !(*opt.sigma >= 0.0 && std::isfinite(*opt.sigma)))
    throw ParameterError("sigma must be non-negative");
  const LevelRange levels = LevelRange::all(empirical);

  if (!opt.rule.bayesian()) {
    r.lambda_by_level = select_threshold(empirical, filter, opt.rule.policy, r.sigma_used, levels);
    r.shrunk = shrink_decomposition(
        empirical, [&](int j) -> ShrinkageRule { return SoftThreshold{r.lambda_by_level.at(j)}; }, levels, opt.quad);
    r.f_hat = inverse(r.shrunk, filter);
    return r;
  }

  // details at rounding level of the coarse coefficients count as zero
  double scale = 0.0;
  for (double c : empirical.scaling) scale = std::max(scale, std::abs(c));
  const double negligible = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  if (!(r.tau_hat > negligible))
    throw DataError("degenerate signal: every detail coefficient is zero, so tau_hat = 0");
  if (!(r.sigma_used > 0.0)) throw DataError("degenerate signal: the noise level is zero");
  for (int j = levels.first; j <= levels.last; ++j)
    r.alpha_by_level[j] =
        opt.alpha_mode == AlphaMode::fixed ? opt.alpha : elicit_alpha(j, empirical.primary_level, opt.gamma);

  r.shrunk = empirical;
  for (int j = levels.first; j <= levels.last; ++j) {
    const double alpha = r.alpha_by_level[j];
    for (double& d : r.shrunk.level(j)) {
      RuleEvaluation e;
      switch (opt.rule.family) {
        case RuleFamily::raised_cosine:
          e = evaluate_raised_cosine_rule(d, {alpha, r.tau_hat, r.sigma_used}, opt.quad);
          break;
        case RuleFamily::uniform_slab:
          e = evaluate_uniform_slab_rule(d, {alpha, r.tau_hat, r.sigma_used}, opt.quad);
          break;
        case RuleFamily::beta:
          e.value = beta_slab_rule(d, {alpha, r.tau_hat, opt.rule.beta_shape, r.sigma_used}, opt.quad);
          break;
        case RuleFamily::soft:
          break;
      }
      d = e.value;
      r.fallback_count += e.fallback ? 1 : 0;
    }
  }
  r.f_hat = inverse(r.shrunk, filter);
  return r;
}

inline DenoiseResult denoise(std::span<const double> y, const QuadratureFilter& filter, const DenoiseOptions& opt) {
  return denoise_decomposition(forward(y, filter, opt.primary_level), filter, opt);
}

}  // namespace rcshrink
