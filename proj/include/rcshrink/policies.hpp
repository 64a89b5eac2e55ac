#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rcshrink/dwt.hpp"
#include "rcshrink/errors.hpp"
#include "rcshrink/normal.hpp"
#include "rcshrink/rules.hpp"
#include "rcshrink/stats.hpp"

namespace rcshrink {

/// 75th percentile of the standard normal distribution.
inline constexpr double mad_normal_constant = 0.6745;

/// Robust noise level from the finest detail level: median |d| / 0.6745.
inline double estimate_sigma(const WaveletDecomposition& decomp) {
  decomp.validate();
  const auto finest = decomp.level(decomp.finest_level());
  if (finest.empty()) throw StructuralError("decomposition has no finest detail level");
  return median_abs(finest) / mad_normal_constant;
}

/// Level-dependent prior weight 1 - (j - J0 + 1)^(-gamma).
inline double elicit_alpha(int level, int primary_level, double gamma = 2.0) {
  if (level < primary_level) throw ParameterError("level error: alpha is defined for levels j >= J0");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  return 1.0 - std::pow(static_cast<double>(level - primary_level + 1), -gamma);
}

inline std::map<int, double> alpha_by_level(const WaveletDecomposition& decomp, double gamma = 2.0) {
  std::map<int, double> out;
  for (int j = decomp.primary_level; j < decomp.num_levels; ++j) out[j] = elicit_alpha(j, decomp.primary_level, gamma);
  return out;
}

/// Slab half-width: the largest absolute detail coefficient.
inline double elicit_tau(const WaveletDecomposition& decomp) {
  decomp.validate();
  double tau = 0.0;
  bool any = false;
  for (const auto& level : decomp.details)
    for (double d : level) {
      tau = std::max(tau, std::abs(d));
      any = true;
    }
  if (!any) throw StructuralError("decomposition has no detail coefficients");
  return tau;
}

struct ElicitationResult {
  double sigma_hat = 0.0;
  double tau_hat = 0.0;
  std::map<int, double> alpha_by_level;
};

inline ElicitationResult elicit(const WaveletDecomposition& decomp, double gamma = 2.0) {
  return {estimate_sigma(decomp), elicit_tau(decomp), alpha_by_level(decomp, gamma)};
}

inline double universal_threshold(double sigma, std::size_t n) {
  if (n < 2) throw ParameterError("universal threshold needs n >= 2");
  if (!(sigma >= 0.0)) throw ParameterError("sigma must be non-negative");
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

/// Step-up false-discovery-rate threshold on two-sided p-values.
inline double fdr_threshold(std::span<const double> details, double sigma, double q = 0.05) {
  if (details.empty()) throw StructuralError("FDR threshold of an empty coefficient set");
  if (!(sigma > 0.0)) throw ParameterError("FDR threshold needs sigma > 0");
  if (!(q > 0.0 && q < 1.0)) throw ParameterError("FDR level q must lie in (0, 1)");
  const std::size_t m = details.size();
  std::vector<double> pvalues(m);
  std::transform(details.begin(), details.end(), pvalues.begin(),
                 [sigma](double d) { return std::erfc(std::abs(d) / (sigma * std::numbers::sqrt2)); });
  std::sort(pvalues.begin(), pvalues.end());
  std::size_t last = 0;  // 1-based rank of the largest rejected p-value
  for (std::size_t k = 1; k <= m; ++k)
    if (pvalues[k - 1] <= static_cast<double>(k) / static_cast<double>(m) * q) last = k;
  if (last == 0) return universal_threshold(sigma, std::max<std::size_t>(m, 2));
  // sigma * Phi^{-1}(1 - p/2), written with the lower quantile to keep tiny p exact
  return -sigma * normal_quantile(0.5 * pvalues[last - 1]);
}

/// SURE(t) = m sigma^2 - 2 sigma^2 #{|d_k| <= t} + sum min(d_k^2, t^2).
inline double sure_objective(std::span<const double> details, double sigma, double t) {
  const double s2 = sigma * sigma;
  double count = 0.0, clipped = 0.0;
  for (double d : details) {
    if (std::abs(d) <= t) count += 1.0;
    clipped += std::min(d * d, t * t);
  }
  return static_cast<double>(details.size()) * s2 - 2.0 * s2 * count + clipped;
}

/// Hybrid SureShrink threshold for one level.
inline double sure_threshold(std::span<const double> details, double sigma) {
  if (details.empty()) throw StructuralError("SURE threshold of an empty level");
  if (!(sigma > 0.0)) throw ParameterError("SURE threshold needs sigma > 0");
  const double m = static_cast<double>(details.size());
  double energy = 0.0;
  for (double d : details) energy += (d / sigma) * (d / sigma);
  const double excess = (energy - m) / m;
  const double eta = std::pow(std::log2(m), 1.5) / std::sqrt(m);
  // single-coefficient levels use n = 2 in the universal fallback
  if (excess <= eta) return universal_threshold(sigma, std::max<std::size_t>(details.size(), 2));
  double best_t = 0.0;
  double best = sure_objective(details, sigma, 0.0);
  std::vector<double> candidates(details.size());
  std::transform(details.begin(), details.end(), candidates.begin(), [](double d) { return std::abs(d); });
  std::sort(candidates.begin(), candidates.end());
  for (double t : candidates) {
    const double v = sure_objective(details, sigma, t);
    if (v < best) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

/// Two-fold cross-validation of the soft threshold on the even/odd subsequences.
class CrossValidation {
 public:
  CrossValidation(std::span<const double> noisy, const QuadratureFilter& filter, int primary_level)
      : filter_(filter) {
    const int J = dyadic_exponent(noisy.size());
    if (J < 3) throw ParameterError("cross-validation needs a dyadic length n >= 8");
    if (primary_level < 0) throw StructuralError("invalid level: J0 must be non-negative");
    n_ = noisy.size();
    const std::size_t half = n_ / 2;
    even_.resize(half);
    odd_.resize(half);
    for (std::size_t i = 0; i < half; ++i) {
      even_[i] = noisy[2 * i];
      odd_[i] = noisy[2 * i + 1];
    }
    const int half_j0 = std::min(primary_level, J - 2);
    even_dec_ = forward(even_, filter_, half_j0);
    odd_dec_ = forward(odd_, filter_, half_j0);
    const auto full = forward(noisy, filter_, std::min(primary_level, J - 1));
    sigma_hat_ = estimate_sigma(full);
    upper_ = universal_threshold(sigma_hat_, n_);
    if (!(upper_ > 0.0)) upper_ = elicit_tau(full);
  }

  /// Sum of squared errors predicting each half from the thresholded other half.
  double objective(double lambda) const {
    const auto ghat_even = denoise(even_dec_, lambda);
    const auto ghat_odd = denoise(odd_dec_, lambda);
    const std::size_t h = even_.size();
    double sse = 0.0;
    for (std::size_t i = 0; i < h; ++i) {
      // odd sample 2i+1 sits between even samples 2i and 2i+2
      const double pred_odd = 0.5 * (ghat_even[i] + ghat_even[(i + 1) % h]);
      // even sample 2i sits between odd samples 2i-1 and 2i+1
      const double pred_even = 0.5 * (ghat_odd[(i + h - 1) % h] + ghat_odd[i]);
      sse += (pred_odd - odd_[i]) * (pred_odd - odd_[i]) + (pred_even - even_[i]) * (pred_even - even_[i]);
    }
    return sse;
  }

  /// Upper end of the search interval: the universal threshold of the full series.
  double search_upper() const noexcept { return upper_; }
  double sigma_hat() const noexcept { return sigma_hat_; }

  /// Rescales a half-sample threshold to the full sample size.
  double rescale(double lambda_half) const {
    const double ln_n = std::log(static_cast<double>(n_));
    return lambda_half / std::sqrt(1.0 - std::numbers::ln2 / ln_n);
  }

  struct Minimum {
    double lambda_half = 0.0;
    double objective = 0.0;
  };

  /// Grid scan of [0, upper] followed by golden-section refinement around the best cell.
  Minimum minimize(int grid_points = 512) const {
    const double hi = upper_;
    Minimum best{0.0, objective(0.0)};
    if (!(hi > 0.0)) return best;
    const double step = hi / (grid_points - 1);
    int best_i = 0;
    for (int i = 1; i < grid_points; ++i) {
      const double lam = step * i;
      const double v = objective(lam);
      if (v < best.objective) {
        best = {lam, v};
        best_i = i;
      }
    }
    double a = std::max(0.0, step * (best_i - 1)), b = std::min(hi, step * (best_i + 1));
    constexpr double inv_phi = 0.61803398874989484820;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = objective(c), fd = objective(d);
    for (int iter = 0; iter < 60 && (b - a) > 1e-10 * std::max(1.0, hi); ++iter) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = objective(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = objective(d);
      }
    }
    const double lam = fc <= fd ? c : d;
    const double v = std::min(fc, fd);
    if (v < best.objective) best = {lam, v};
    return best;
  }

 private:
  std::vector<double> denoise(const WaveletDecomposition& dec, double lambda) const {
    WaveletDecomposition t = dec;
    for (auto& level : t.details)
      for (double& d : level) d = soft_threshold(d, lambda);
    return inverse(t, filter_);
  }

  QuadratureFilter filter_;
  std::size_t n_ = 0;
  std::vector<double> even_, odd_;
  WaveletDecomposition even_dec_, odd_dec_;
  double sigma_hat_ = 0.0;
  double upper_ = 0.0;
};

/// Cross-validated soft threshold for the full-length series.
inline double cv_threshold(std::span<const double> noisy, const QuadratureFilter& filter, int primary_level) {
  const CrossValidation cv(noisy, filter, primary_level);
  return cv.rescale(cv.minimize().lambda_half);
}

enum class PolicyKind { universal, fdr, cv, sure };
enum class PolicyScope { global, by_level };

/// Threshold-selection policy for the soft rule. Without an explicit scope, universal and
/// FDR pool all levels, SURE works level by level; CV is always global.
struct ThresholdPolicy {
  PolicyKind kind = PolicyKind::universal;
  double q = 0.05;
  std::optional<PolicyScope> scope;

  static PolicyScope default_scope(PolicyKind k) noexcept {
    return k == PolicyKind::sure ? PolicyScope::by_level : PolicyScope::global;
  }
  PolicyScope effective_scope() const noexcept { return scope.value_or(default_scope(kind)); }

  void validate() const {
    if (!(q > 0.0 && q < 1.0)) throw ParameterError("FDR level q must lie in (0, 1)");
    if (kind == PolicyKind::cv && effective_scope() == PolicyScope::by_level)
      throw ParameterError("cross-validation selects one global threshold");
  }
};

inline std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::universal: return "universal";
    case PolicyKind::fdr: return "fdr";
    case PolicyKind::cv: return "cv";
    case PolicyKind::sure: return "sure";
  }
  return "?";
}

inline PolicyKind parse_policy_kind(const std::string& s) {
  if (s == "universal") return PolicyKind::universal;
  if (s == "fdr") return PolicyKind::fdr;
  if (s == "cv") return PolicyKind::cv;
  if (s == "sure") return PolicyKind::sure;
  throw ParameterError("unknown threshold policy '" + s + "'");
}

/// Threshold per detail level in `levels` for the soft rule.
inline std::map<int, double> select_threshold(const WaveletDecomposition& decomp, const QuadratureFilter& filter,
                                              const ThresholdPolicy& policy, double sigma, LevelRange levels) {
  policy.validate();
  decomp.validate();
  std::map<int, double> out;
  if (levels.empty()) return out;
  if (levels.first < decomp.primary_level || levels.last > decomp.finest_level())
    throw StructuralError("threshold level range is outside [J0, J-1]");

  auto pooled = [&] {
    std::vector<double> all;
    for (int j = levels.first; j <= levels.last; ++j) {
      const auto lv = decomp.level(j);
      all.insert(all.end(), lv.begin(), lv.end());
    }
    return all;
  };
  auto broadcast = [&](double lambda) {
    for (int j = levels.first; j <= levels.last; ++j) out[j] = lambda;
  };

  switch (policy.kind) {
    case PolicyKind::universal:
      if (policy.effective_scope() == PolicyScope::global)
        broadcast(universal_threshold(sigma, decomp.size()));
      else
        for (int j = levels.first; j <= levels.last; ++j)
          out[j] = universal_threshold(sigma, std::max<std::size_t>(decomp.level(j).size(), 2));
      break;
    case PolicyKind::fdr:
      if (policy.effective_scope() == PolicyScope::global)
        broadcast(fdr_threshold(pooled(), sigma, policy.q));
      else
        for (int j = levels.first; j <= levels.last; ++j) out[j] = fdr_threshold(decomp.level(j), sigma, policy.q);
      break;
    case PolicyKind::cv: {
      const std::vector<double> y = inverse(decomp, filter);
      broadcast(cv_threshold(y, filter, decomp.primary_level));
      break;
    }
    case PolicyKind::sure:
      if (policy.effective_scope() == PolicyScope::global)
        broadcast(sure_threshold(pooled(), sigma));
      else
        for (int j = levels.first; j <= levels.last; ++j) out[j] = sure_threshold(decomp.level(j), sigma);
      break;
  }
  return out;
}

}  // namespace rcshrink
