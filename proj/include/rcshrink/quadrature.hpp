#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <vector>

#include "rcshrink/errors.hpp"

namespace rcshrink {

/// Accuracy contract for the adaptive Gauss-Legendre integrator.
struct QuadratureSpec {
  double relative_tolerance = 1e-10;  // relative to the integral of |f|
  int max_subdivisions = 1 << 14;
  int nodes_per_panel = 16;

  void validate() const {
    if (!(relative_tolerance > 0.0)) throw ParameterError("quadrature tolerance must be positive");
    if (max_subdivisions < 1) throw ParameterError("quadrature needs at least one subdivision");
    if (nodes_per_panel < 1 || nodes_per_panel > 128)
      throw ParameterError("Gauss-Legendre order must lie in [1, 128]");
  }
};

/// Nodes and weights of an interpolatory rule. Nodes are stored in ascending order.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Returns (P_n(x), P_n'(x)).
inline std::array<double, 2> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

inline GaussRule make_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x)[1];
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x is the i-th largest node; mirror so the rule is exactly symmetric
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// Physicists' Gauss-Hermite by Newton iteration on the orthonormal recurrence,
// converted to expectations over a standard normal variate.
inline GaussRule make_gauss_hermite_normal(int n) {
  constexpr double pim4 = 0.7511255444649425;  // pi^{-1/4}
  std::vector<double> x(n), w(n);
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0)
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    else if (i == 1)
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    else if (i == 2)
      z = 1.86 * z - 0.86 * x[0];
    else if (i == 3)
      z = 1.91 * z - 0.91 * x[1];
    else
      z = 2.0 * z - x[i - 2];
    double pp = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
        // one more derivative evaluation at the final node
        p1 = pim4;
        p2 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
        }
        pp = std::sqrt(2.0 * n) * p2;
        break;
      }
    }
    x[i] = z;
    w[i] = 2.0 / (pp * pp);
  }
  GaussRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  for (int i = 0; i < half; ++i) {
    const double node = std::numbers::sqrt2 * x[i];
    const double weight = w[i] * inv_sqrt_pi;
    rule.nodes[n - 1 - i] = node;
    rule.nodes[i] = -node;
    rule.weights[n - 1 - i] = weight;
    rule.weights[i] = weight;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

template <GaussRule (*Make)(int), int MaxOrder>
const GaussRule& cached_rule(int n) {
  if (n < 1 || n > MaxOrder) throw ParameterError("quadrature order out of supported range");
  static std::array<std::once_flag, MaxOrder + 1> flags;
  static std::array<std::unique_ptr<GaussRule>, MaxOrder + 1> rules;
  std::call_once(flags[n], [n] { rules[n] = std::make_unique<GaussRule>(Make(n)); });
  return *rules[n];
}

}  // namespace detail

/// Gauss-Legendre rule on [-1, 1].
inline const GaussRule& gauss_legendre(int n) {
  return detail::cached_rule<&detail::make_gauss_legendre, 128>(n);
}

/// Gauss-Hermite rule for E[h(Z)], Z ~ N(0, 1): sum_i w_i h(z_i). Weights sum to one.
inline const GaussRule& gauss_hermite_normal(int n) {
  return detail::cached_rule<&detail::make_gauss_hermite_normal, 512>(n);
}

template <std::size_t K>
struct IntegrationResult {
  std::array<double, K> value{};
  std::array<double, K> error{};
  int panels = 0;
};

/// Globally adaptive composite Gauss-Legendre quadrature of a vector-valued integrand.
///
/// `f(x)` returns std::array<double, K>. The interval is first cut at `breakpoints`
/// (sorted, first and last being the integration limits). Each panel is estimated on
/// the whole panel and on its two halves; the panel with the largest discrepancy is
/// bisected until, component-wise, the summed discrepancy is below
/// `relative_tolerance` times the integral of |f_k|.
template <std::size_t K, class F>
IntegrationResult<K> integrate_adaptive(F&& f, std::span<const double> breakpoints,
                                        const QuadratureSpec& spec = {}) {
  using Vec = std::array<double, K>;
  const GaussRule& rule = gauss_legendre(spec.nodes_per_panel);

  struct Sum {
    Vec value{};
    Vec l1{};
  };
  auto gl = [&](double a, double b) {
    Sum s;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const Vec v = f(mid + half * rule.nodes[i]);
      for (std::size_t k = 0; k < K; ++k) {
        s.value[k] += rule.weights[i] * v[k];
        s.l1[k] += rule.weights[i] * std::abs(v[k]);
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      s.value[k] *= half;
      s.l1[k] *= half;
    }
    return s;
  };

  struct Panel {
    double a, b;
    Sum left, right;
    Vec err;
    double score;
  };
  auto refine = [&](double a, double b, const Vec& coarse) {
    Panel p{a, b, gl(a, 0.5 * (a + b)), gl(0.5 * (a + b), b), {}, 0.0};
    for (std::size_t k = 0; k < K; ++k)
      p.err[k] = std::abs(coarse[k] - (p.left.value[k] + p.right.value[k]));
    return p;
  };

  std::vector<Panel> panels;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i], b = breakpoints[i + 1];
    if (!(b > a)) continue;
    panels.push_back(refine(a, b, gl(a, b).value));
  }

  Vec l1_total{}, err_total{};
  auto totals = [&] {
    l1_total = {};
    err_total = {};
    for (const Panel& p : panels)
      for (std::size_t k = 0; k < K; ++k) {
        l1_total[k] += p.left.l1[k] + p.right.l1[k];
        err_total[k] += p.err[k];
      }
  };
  totals();
  const Vec scale = l1_total;
  auto score = [&](Panel& p) {
    double s = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      s = std::max(s, scale[k] > 0.0 ? p.err[k] / scale[k] : 0.0);
    p.score = s;
  };
  for (Panel& p : panels) score(p);
  auto cmp = [](const Panel& x, const Panel& y) { return x.score < y.score; };
  std::make_heap(panels.begin(), panels.end(), cmp);

  auto converged = [&] {
    for (std::size_t k = 0; k < K; ++k)
      if (err_total[k] > spec.relative_tolerance * l1_total[k]) return false;
    return true;
  };

  int splits = 0;
  while (!panels.empty() && !converged()) {
    if (splits >= spec.max_subdivisions) {
      double worst = 0.0;
      for (std::size_t k = 0; k < K; ++k)
        if (l1_total[k] > 0.0) worst = std::max(worst, err_total[k] / l1_total[k]);
      throw NumericalError("adaptive quadrature did not converge", worst);
    }
    std::pop_heap(panels.begin(), panels.end(), cmp);
    Panel parent = panels.back();
    panels.pop_back();
    const double mid = 0.5 * (parent.a + parent.b);
    Panel lhs = refine(parent.a, mid, parent.left.value);
    Panel rhs = refine(mid, parent.b, parent.right.value);
    for (std::size_t k = 0; k < K; ++k) {
      err_total[k] += lhs.err[k] + rhs.err[k] - parent.err[k];
      l1_total[k] += lhs.left.l1[k] + lhs.right.l1[k] + rhs.left.l1[k] + rhs.right.l1[k] -
                     parent.left.l1[k] - parent.right.l1[k];
    }
    score(lhs);
    score(rhs);
    panels.push_back(lhs);
    std::push_heap(panels.begin(), panels.end(), cmp);
    panels.push_back(rhs);
    std::push_heap(panels.begin(), panels.end(), cmp);
    ++splits;
  }

  // deterministic summation in left-to-right order
  std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  IntegrationResult<K> out;
  out.panels = static_cast<int>(panels.size());
  for (const Panel& p : panels)
    for (std::size_t k = 0; k < K; ++k) {
      out.value[k] += p.left.value[k] + p.right.value[k];
      out.error[k] += p.err[k];
    }
  return out;
}

/// Scalar convenience wrapper over [lo, hi].
template <class F>
double integrate(F&& f, double lo, double hi, const QuadratureSpec& spec = {}) {
  const std::array<double, 2> bp{lo, hi};
  auto res = integrate_adaptive<1>([&](double x) { return std::array<double, 1>{f(x)}; },
                                   std::span<const double>(bp), spec);
  return res.value[0];
}

}  // namespace rcshrink
