#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rcshrink/errors.hpp"

namespace rcshrink {

/// Pairwise (cascade) summation; the result depends only on the order of `v`.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double mean(std::span<const double> v) {
  if (v.empty()) throw StructuralError("mean of an empty sequence");
  return pairwise_sum(v) / static_cast<double>(v.size());
}

/// Median; for even lengths the midpoint of the two central order statistics.
inline double median(std::span<const double> v) {
  if (v.empty()) throw StructuralError("median of an empty sequence");
  std::vector<double> w(v.begin(), v.end());
  const std::size_t mid = w.size() / 2;
  std::nth_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(mid), w.end());
  const double upper = w[mid];
  if (w.size() % 2 == 1) return upper;
  const double lower = *std::max_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

inline double median_abs(std::span<const double> v) {
  std::vector<double> a(v.size());
  std::transform(v.begin(), v.end(), a.begin(), [](double x) { return std::abs(x); });
  return median(a);
}

namespace detail {
inline double sum_sq_dev(std::span<const double> v, double mu) {
  std::vector<double> sq(v.size());
  std::transform(v.begin(), v.end(), sq.begin(), [mu](double x) { return (x - mu) * (x - mu); });
  return pairwise_sum(sq);
}
}  // namespace detail

/// Standard deviation with divisor n.
inline double population_sd(std::span<const double> v) {
  const double mu = mean(v);
  return std::sqrt(detail::sum_sq_dev(v, mu) / static_cast<double>(v.size()));
}

/// Standard deviation with divisor n - 1 (zero for a single value).
inline double sample_sd(std::span<const double> v) {
  const double mu = mean(v);
  if (v.size() < 2) return 0.0;
  return std::sqrt(detail::sum_sq_dev(v, mu) / static_cast<double>(v.size() - 1));
}

}  // namespace rcshrink
