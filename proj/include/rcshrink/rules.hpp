#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "rcshrink/dwt.hpp"
#include "rcshrink/errors.hpp"
#include "rcshrink/normal.hpp"
#include "rcshrink/quadrature.hpp"

namespace rcshrink {

/// Spike-and-slab prior alpha*delta_0 + (1-alpha)*g with a raised-cosine slab on (-tau, tau).
/// alpha = 0 (pure slab) is accepted so level-wise elicitation can start at the primary level.
struct RaisedCosineParams {
  double alpha = 0.9;
  double tau = 1.0;
  double sigma = 1.0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in [0, 1)");
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ParameterError("tau must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be positive");
  }
};

/// Same mixture with a symmetric beta slab on (-m, m) of shape a.
struct BetaSlabParams {
  double alpha = 0.9;
  double m = 1.0;
  double a = 1.0;
  double sigma = 1.0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in [0, 1)");
    if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError("beta support half-width m must be positive");
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("beta shape a must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be positive");
  }
};

/// Uniform slab on (-m, m); evaluated in closed form.
struct UniformSlabParams {
  double alpha = 0.9;
  double m = 1.0;
  double sigma = 1.0;

  void validate() const { BetaSlabParams{alpha, m, 1.0, sigma}.validate(); }
};

struct SoftThreshold {
  double lambda = 0.0;
};

using ShrinkageRule = std::variant<RaisedCosineParams, BetaSlabParams, UniformSlabParams, SoftThreshold>;

/// Result of a Bayes-rule evaluation. `fallback` records that the closed-form path
/// underflowed and the rescaled generic engine produced the value.
struct RuleEvaluation {
  double value = 0.0;
  bool fallback = false;
};

inline double raised_cosine_pdf(double theta, double tau) {
  if (!(tau > 0.0)) throw ParameterError("raised cosine: tau must be positive");
  if (!(std::abs(theta) < tau)) return 0.0;
  // (1 + cos x) / 2 = cos^2(x / 2), which stays accurate next to the support edges
  const double c = std::cos(0.5 * std::numbers::pi * theta / tau);
  return c * c / tau;
}

inline double beta_slab_pdf(double theta, double m, double a) {
  if (!(m > 0.0) || !(a > 0.0)) throw ParameterError("beta slab: m and a must be positive");
  if (!(std::abs(theta) < m)) return 0.0;
  if (a == 1.0) return 0.5 / m;
  const double log_beta = 2.0 * std::lgamma(a) - std::lgamma(2.0 * a);
  return std::exp((a - 1.0) * std::log(m * m - theta * theta) - (2.0 * a - 1.0) * std::log(2.0 * m) - log_beta);
}

/// Support of a slab density. `even` marks a density symmetric about zero on (-hi, hi).
struct SlabSupport {
  double lo = -1.0;
  double hi = 1.0;
  bool even = false;
};

namespace detail {

// Breakpoints that pin the panels to a Gaussian bump of width `scale` at `center`.
inline std::vector<double> bump_breakpoints(double lo, double hi, double center, double scale) {
  std::vector<double> bp{lo, hi};
  for (double k : {0.0, 1.0, 4.0, 8.0}) {
    for (double s : {-1.0, 1.0}) {
      const double x = center + s * k * scale;
      if (x > lo && x < hi) bp.push_back(x);
    }
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

// Posterior mean with the likelihood rescaled so its maximum over the support is one.
template <class Pdf>
double posterior_mean_scaled(double d, double alpha, double sigma, Pdf& slab_pdf, double lo, double hi,
                             const QuadratureSpec& quad) {
  const double nearest = std::clamp(d, lo, hi);
  const double inv2s2 = 0.5 / (sigma * sigma);
  // outside the support the likelihood decays like exp(-gap * u / sigma^2) away from the edge
  const double gap = std::abs(d - nearest);
  const double width = gap > sigma ? sigma * sigma / gap : sigma;
  const std::vector<double> bp = bump_breakpoints(lo, hi, nearest, width);
  auto res = integrate_adaptive<2>(
      [&](double theta) {
        // ((d - nearest)^2 - (d - theta)^2) / 2s^2, factored to avoid cancelling large squares
        const double w = std::exp(-(nearest - theta) * (2.0 * d - nearest - theta) * inv2s2) * slab_pdf(theta);
        return std::array<double, 2>{theta * w, w};
      },
      std::span<const double>(bp), quad);
  const double spike = alpha * std::exp(-nearest * (2.0 * d - nearest) * inv2s2);
  const double den = spike + (1.0 - alpha) * res.value[1];
  if (!(den > 0.0)) throw NumericalError("posterior normalizer vanished", 0.0);
  return (1.0 - alpha) * res.value[0] / den;
}

// exponent of the Gaussian factor at the support point closest to d
inline double tail_exponent(double d, double half_width, double sigma) {
  const double gap = std::max(0.0, std::abs(d) - half_width) / sigma;
  return 0.5 * gap * gap;
}

inline constexpr double underflow_exponent = 600.0;

}  // namespace detail

/// Posterior mean E[theta | d] under alpha*delta_0 + (1-alpha)*g, d | theta ~ N(theta, sigma^2).
///
/// The integrals run over the slab support in theta-space with the Gaussian factor
/// rescaled by its maximum over the support, so any |d| is representable.
template <class Pdf>
  requires std::invocable<Pdf&, double>
double mixture_posterior_mean(double d, double alpha, double sigma, Pdf&& slab_pdf, SlabSupport support,
                              const QuadratureSpec& quad = {}) {
  if (!(support.lo < support.hi)) throw ParameterError("slab support must satisfy lo < hi");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in [0, 1)");
  if (!(sigma > 0.0)) throw ParameterError("sigma must be positive");
  quad.validate();
  if (support.even) {
    if (support.lo != -support.hi) throw ParameterError("even slab requires a support symmetric about zero");
    if (d == 0.0) return 0.0;
    const double v = detail::posterior_mean_scaled(std::abs(d), alpha, sigma, slab_pdf, support.lo, support.hi, quad);
    return std::copysign(v, d);
  }
  return detail::posterior_mean_scaled(d, alpha, sigma, slab_pdf, support.lo, support.hi, quad);
}

/// Raised-cosine Bayes rule from its semi-closed form: normal CDF/PDF terms plus the two
/// cosine-weighted Gaussian integrals, evaluated by adaptive quadrature in standardized units.
inline RuleEvaluation evaluate_raised_cosine_rule(double d, const RaisedCosineParams& p,
                                                  const QuadratureSpec& quad = {}) {
  p.validate();
  quad.validate();
  if (d == 0.0) return {0.0, false};
  const double x = std::abs(d);
  const double tau = p.tau, sigma = p.sigma, alpha = p.alpha;
  if (detail::tail_exponent(x, tau, sigma) > detail::underflow_exponent) {
    auto pdf = [tau](double t) { return raised_cosine_pdf(t, tau); };
    const double v = detail::posterior_mean_scaled(x, alpha, sigma, pdf, -tau, tau, quad);
    return {std::copysign(v, d), true};
  }
  const double lo = (-tau - x) / sigma, hi = (tau - x) / sigma;
  const double mass = normal_mass(lo, hi);
  const double inv2tau = 0.5 / tau;
  const double omega = std::numbers::pi / tau;
  const std::vector<double> bp = detail::bump_breakpoints(lo, hi, std::clamp(0.0, lo, hi), 1.0);
  auto cos_terms = integrate_adaptive<2>(
      [&](double u) {
        const double theta = sigma * u + x;
        const double c = inv2tau * std::cos(omega * theta) * normal_pdf(u);
        return std::array<double, 2>{theta * c, c};
      },
      std::span<const double>(bp), quad);
  const double i1 = cos_terms.value[0], i2 = cos_terms.value[1];
  const double num = (1.0 - alpha) * (sigma * inv2tau * (normal_pdf(lo) - normal_pdf(hi)) + x * inv2tau * mass + i1);
  const double den = alpha / sigma * normal_pdf(x / sigma) + (1.0 - alpha) * (inv2tau * mass + i2);
  if (!(den > 0.0) || !std::isfinite(num / den)) {
    auto pdf = [tau](double t) { return raised_cosine_pdf(t, tau); };
    const double v = detail::posterior_mean_scaled(x, alpha, sigma, pdf, -tau, tau, quad);
    return {std::copysign(v, d), true};
  }
  return {std::copysign(num / den, d), false};
}

inline double raised_cosine_rule(double d, const RaisedCosineParams& p, const QuadratureSpec& quad = {}) {
  return evaluate_raised_cosine_rule(d, p, quad).value;
}

/// Beta-slab Bayes rule through the generic engine.
inline double beta_slab_rule(double d, const BetaSlabParams& p, const QuadratureSpec& quad = {}) {
  p.validate();
  const double m = p.m, a = p.a;
  return mixture_posterior_mean(
      d, p.alpha, p.sigma, [m, a](double t) { return beta_slab_pdf(t, m, a); }, SlabSupport{-m, m, true}, quad);
}

/// Uniform-slab Bayes rule via the truncated-normal mean identity.
inline RuleEvaluation evaluate_uniform_slab_rule(double d, const UniformSlabParams& p,
                                                 const QuadratureSpec& quad = {}) {
  p.validate();
  if (d == 0.0) return {0.0, false};
  const double x = std::abs(d);
  const double m = p.m, sigma = p.sigma, alpha = p.alpha;
  if (detail::tail_exponent(x, m, sigma) > detail::underflow_exponent) {
    auto pdf = [m](double t) { return std::abs(t) < m ? 0.5 / m : 0.0; };
    const double v = detail::posterior_mean_scaled(x, alpha, sigma, pdf, -m, m, quad);
    return {std::copysign(v, d), true};
  }
  const double lo = (-m - x) / sigma, hi = (m - x) / sigma;
  const double mass = normal_mass(lo, hi);
  const double num = (1.0 - alpha) * (sigma * (normal_pdf(lo) - normal_pdf(hi)) + x * mass) / (2.0 * m);
  const double den = alpha / sigma * normal_pdf(x / sigma) + (1.0 - alpha) * mass / (2.0 * m);
  return {std::copysign(num / den, d), false};
}

inline double uniform_slab_rule(double d, const UniformSlabParams& p, const QuadratureSpec& quad = {}) {
  return evaluate_uniform_slab_rule(d, p, quad).value;
}

inline double soft_threshold(double d, double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("soft threshold: lambda must be non-negative");
  const double excess = std::abs(d) - lambda;
  return excess > 0.0 ? std::copysign(excess, d) : 0.0;
}

/// Applies any rule alternative to one coefficient.
inline double apply_rule(const ShrinkageRule& rule, double d, const QuadratureSpec& quad = {}) {
  struct Visitor {
    double d;
    const QuadratureSpec& quad;
    double operator()(const RaisedCosineParams& p) const { return raised_cosine_rule(d, p, quad); }
    double operator()(const BetaSlabParams& p) const { return beta_slab_rule(d, p, quad); }
    double operator()(const UniformSlabParams& p) const { return uniform_slab_rule(d, p, quad); }
    double operator()(const SoftThreshold& s) const { return soft_threshold(d, s.lambda); }
  };
  return std::visit(Visitor{d, quad}, rule);
}

/// Inclusive range of detail levels; empty when first > last.
struct LevelRange {
  int first = 0;
  int last = -1;

  bool empty() const noexcept { return first > last; }
  static LevelRange all(const WaveletDecomposition& d) { return {d.primary_level, d.finest_level()}; }
};

/// Replaces the detail coefficients of every level in `levels` by `rule_for_level(j)` applied
/// coefficient-wise. Scaling coefficients and levels outside the range are copied unchanged.
template <class RuleForLevel>
  requires std::invocable<RuleForLevel&, int>
WaveletDecomposition shrink_decomposition(const WaveletDecomposition& decomp, RuleForLevel&& rule_for_level,
                                          LevelRange levels, const QuadratureSpec& quad = {}) {
  decomp.validate();
  if (!levels.empty() && (levels.first < decomp.primary_level || levels.last > decomp.finest_level()))
    throw StructuralError("level range [" + std::to_string(levels.first) + ", " + std::to_string(levels.last) +
                          "] is outside [J0, J-1]");
  WaveletDecomposition out = decomp;
  for (int j = levels.first; j <= levels.last; ++j) {
    const ShrinkageRule rule = rule_for_level(j);
    for (double& d : out.level(j)) d = apply_rule(rule, d, quad);
  }
  return out;
}

inline WaveletDecomposition shrink_decomposition(const WaveletDecomposition& decomp, const ShrinkageRule& rule,
                                                 LevelRange levels, const QuadratureSpec& quad = {}) {
  return shrink_decomposition(decomp, [&rule](int) { return rule; }, levels, quad);
}

}  // namespace rcshrink
