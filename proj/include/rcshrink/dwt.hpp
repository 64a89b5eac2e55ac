#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rcshrink/detail/daubechies_table.hpp"
#include "rcshrink/errors.hpp"

namespace rcshrink {

/// Orthogonal two-channel filter pair. `highpass` is the alternating flip of `lowpass`.
struct QuadratureFilter {
  std::vector<double> lowpass;
  std::vector<double> highpass;
  int vanishing_moments = 0;

  std::size_t taps() const noexcept { return lowpass.size(); }
};

/// Daubechies extremal-phase filter with the given number of vanishing moments (1..10).
inline QuadratureFilter build_filter(int vanishing_moments) {
  const std::span<const double> taps = detail::daubechies_taps(vanishing_moments);
  if (taps.empty())
    throw ParameterError("unsupported filter: Daubechies filters exist for 1..10 vanishing moments, got " +
                         std::to_string(vanishing_moments));
  QuadratureFilter filter;
  filter.vanishing_moments = vanishing_moments;
  filter.lowpass.assign(taps.begin(), taps.end());
  const std::size_t L = taps.size();
  filter.highpass.resize(L);
  for (std::size_t i = 0; i < L; ++i)
    filter.highpass[i] = (i % 2 == 0 ? 1.0 : -1.0) * filter.lowpass[L - 1 - i];
  return filter;
}

enum class Boundary { periodic };

/// Multilevel coefficients of a signal of length 2^num_levels.
///
/// `scaling` holds the 2^primary_level coarsest scaling coefficients; `details[j - primary_level]`
/// holds the 2^j detail coefficients at level j, for primary_level <= j < num_levels.
struct WaveletDecomposition {
  int num_levels = 0;
  int primary_level = 0;
  std::vector<double> scaling;
  std::vector<std::vector<double>> details;

  static WaveletDecomposition zeros(int num_levels, int primary_level) {
    if (primary_level < 0 || primary_level >= num_levels)
      throw StructuralError("invalid level: primary level must satisfy 0 <= J0 < J");
    WaveletDecomposition d;
    d.num_levels = num_levels;
    d.primary_level = primary_level;
    d.scaling.assign(std::size_t{1} << primary_level, 0.0);
    for (int j = primary_level; j < num_levels; ++j) d.details.emplace_back(std::size_t{1} << j, 0.0);
    return d;
  }

  std::size_t size() const noexcept { return std::size_t{1} << num_levels; }
  int finest_level() const noexcept { return num_levels - 1; }
  bool has_level(int j) const noexcept { return j >= primary_level && j < num_levels; }

  std::span<double> level(int j) {
    check_level(j);
    return details[static_cast<std::size_t>(j - primary_level)];
  }
  std::span<const double> level(int j) const {
    check_level(j);
    return details[static_cast<std::size_t>(j - primary_level)];
  }

  void validate() const {
    if (primary_level < 0 || primary_level >= num_levels)
      throw StructuralError("decomposition has an invalid primary level");
    if (scaling.size() != (std::size_t{1} << primary_level))
      throw StructuralError("scaling coefficient count must be 2^J0");
    if (details.size() != static_cast<std::size_t>(num_levels - primary_level))
      throw StructuralError("decomposition must store every level from J0 to J-1");
    for (int j = primary_level; j < num_levels; ++j)
      if (details[static_cast<std::size_t>(j - primary_level)].size() != (std::size_t{1} << j))
        throw StructuralError("detail level " + std::to_string(j) + " must hold 2^" + std::to_string(j) +
                              " coefficients");
  }

 private:
  void check_level(int j) const {
    if (!has_level(j)) throw StructuralError("level " + std::to_string(j) + " is not stored in the decomposition");
  }
};

/// log2 of a power-of-two length, or -1 otherwise.
inline int dyadic_exponent(std::size_t n) noexcept {
  if (n == 0 || !std::has_single_bit(n)) return -1;
  return std::countr_zero(n);
}

namespace detail {

// One analysis step with periodic wrap; outputs are decimated at even positions.
inline void analysis_step(std::span<const double> input, const QuadratureFilter& filter,
                          std::span<double> approx, std::span<double> detail_out) {
  const std::size_t N = input.size(), L = filter.taps();
  for (std::size_t k = 0; k < N / 2; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      const double x = input[(2 * k + i) % N];
      a += filter.lowpass[i] * x;
      d += filter.highpass[i] * x;
    }
    approx[k] = a;
    detail_out[k] = d;
  }
}

inline void synthesis_step(std::span<const double> approx, std::span<const double> detail_in,
                           const QuadratureFilter& filter, std::span<double> output) {
  const std::size_t N = output.size(), L = filter.taps();
  std::fill(output.begin(), output.end(), 0.0);
  for (std::size_t k = 0; k < N / 2; ++k) {
    const double a = approx[k], d = detail_in[k];
    for (std::size_t i = 0; i < L; ++i) output[(2 * k + i) % N] += filter.lowpass[i] * a + filter.highpass[i] * d;
  }
}

}  // namespace detail

/// Pyramidal periodized DWT from level J-1 down to `primary_level`.
inline WaveletDecomposition forward(std::span<const double> signal, const QuadratureFilter& filter,
                                    int primary_level, Boundary = Boundary::periodic) {
  const int J = dyadic_exponent(signal.size());
  if (J < 0) throw StructuralError("dyadic length required, got " + std::to_string(signal.size()));
  if (primary_level < 0 || primary_level >= J)
    throw StructuralError("invalid level: J0 = " + std::to_string(primary_level) + " with J = " + std::to_string(J));
  WaveletDecomposition out = WaveletDecomposition::zeros(J, primary_level);
  std::vector<double> current(signal.begin(), signal.end());
  std::vector<double> next;
  for (int j = J - 1; j >= primary_level; --j) {
    next.assign(current.size() / 2, 0.0);
    detail::analysis_step(current, filter, next, out.level(j));
    current.swap(next);
  }
  out.scaling = std::move(current);
  return out;
}

/// Inverse of `forward`.
inline std::vector<double> inverse(const WaveletDecomposition& decomp, const QuadratureFilter& filter) {
  decomp.validate();
  std::vector<double> current = decomp.scaling;
  std::vector<double> next;
  for (int j = decomp.primary_level; j < decomp.num_levels; ++j) {
    next.assign(current.size() * 2, 0.0);
    detail::synthesis_step(current, decomp.level(j), filter, next);
    current.swap(next);
  }
  return current;
}

}  // namespace rcshrink
