#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rcshrink/dwt.hpp"
#include "rcshrink/errors.hpp"
#include "rcshrink/normal.hpp"
#include "rcshrink/stats.hpp"

namespace rcshrink {

enum class TestFunctionName { bumps, blocks, doppler, heavisine };

inline std::string to_string(TestFunctionName f) {
  switch (f) {
    case TestFunctionName::bumps: return "bumps";
    case TestFunctionName::blocks: return "blocks";
    case TestFunctionName::doppler: return "doppler";
    case TestFunctionName::heavisine: return "heavisine";
  }
  return "?";
}

inline TestFunctionName parse_test_function(const std::string& s) {
  if (s == "bumps") return TestFunctionName::bumps;
  if (s == "blocks") return TestFunctionName::blocks;
  if (s == "doppler") return TestFunctionName::doppler;
  if (s == "heavisine") return TestFunctionName::heavisine;
  throw ParameterError("unknown test function '" + s + "' (expected bumps, blocks, doppler or heavisine)");
}

struct TestFunction {
  TestFunctionName name = TestFunctionName::bumps;
  std::vector<double> x;
  std::vector<double> values;
  std::optional<double> rescaled_sd;
};

namespace detail {

inline constexpr std::array<double, 11> dj_positions{0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81};
inline constexpr std::array<double, 11> bumps_heights{4, 5, 3, 4, 5, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2};
inline constexpr std::array<double, 11> bumps_widths{0.005, 0.005, 0.006, 0.01, 0.01, 0.03,
                                                     0.01,  0.01,  0.005, 0.008, 0.005};
inline constexpr std::array<double, 11> blocks_heights{4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2};

// sgn with sgn(0) = 0
inline double sgn(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

}  // namespace detail

/// Pointwise value of a Donoho-Johnstone test function at x.
inline double dj_value(TestFunctionName name, double x) {
  using namespace detail;
  switch (name) {
    case TestFunctionName::bumps: {
      double f = 0.0;
      for (std::size_t j = 0; j < dj_positions.size(); ++j)
        f += bumps_heights[j] * std::pow(1.0 + std::abs((x - dj_positions[j]) / bumps_widths[j]), -4.0);
      return f;
    }
    case TestFunctionName::blocks: {
      double f = 0.0;
      for (std::size_t j = 0; j < dj_positions.size(); ++j)
        f += blocks_heights[j] * (1.0 + sgn(x - dj_positions[j])) / 2.0;
      return f;
    }
    case TestFunctionName::doppler:
      return std::sqrt(x * (1.0 - x)) * std::sin(2.0 * std::numbers::pi * 1.05 / (x + 0.05));
    case TestFunctionName::heavisine:
      return 4.0 * std::sin(4.0 * std::numbers::pi * x) - sgn(x - 0.3) - sgn(0.72 - x);
  }
  return 0.0;
}

/// Unscaled test function sampled at x_i = i/n, i = 1..n.
inline TestFunction dj_function(TestFunctionName name, std::size_t n) {
  if (dyadic_exponent(n) < 3) throw ParameterError("test functions need a dyadic n >= 8");
  TestFunction tf;
  tf.name = name;
  tf.x.resize(n);
  tf.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tf.x[i] = static_cast<double>(i + 1) / static_cast<double>(n);
    tf.values[i] = dj_value(name, tf.x[i]);
  }
  return tf;
}

/// f * target / SD(f), population SD.
inline std::vector<double> rescale_to_sd(std::span<const double> f, double target) {
  if (!(target > 0.0)) throw ParameterError("target standard deviation must be positive");
  if (f.empty()) throw StructuralError("cannot rescale an empty signal");
  const double sd = population_sd(f);
  if (!(sd > 0.0)) throw DataError("degenerate signal: constant input has zero standard deviation");
  std::vector<double> out(f.size());
  const double k = target / sd;
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * k;
  return out;
}

/// Test function rescaled to standard deviation `sd` (7 for the usual benchmark).
inline TestFunction make_test_signal(TestFunctionName name, std::size_t n, double sd = 7.0) {
  TestFunction tf = dj_function(name, n);
  tf.values = rescale_to_sd(tf.values, sd);
  tf.rescaled_sd = sd;
  return tf;
}

/// Philox4x32-10 counter-based generator.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  Counter operator()(Counter ctr) const noexcept {
    Key key = key_;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  Key key_;
};

/// Standard normal variates addressed by (seed, stream, index); inverse-CDF transform of
/// 53-bit uniforms on the open unit interval.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept : rng_(seed), stream_(stream) {}

  double operator()(std::uint64_t index) const noexcept {
    const std::uint64_t block = index / 2;
    const auto out = rng_({static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                           static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)});
    const std::uint64_t bits = index % 2 == 0 ? (std::uint64_t{out[0]} << 32 | out[1])
                                              : (std::uint64_t{out[2]} << 32 | out[3]);
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    return normal_quantile(u);
  }

  std::vector<double> draw(std::size_t n) const {
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (*this)(i);
    return z;
  }

 private:
  Philox4x32 rng_;
  std::uint64_t stream_;
};

/// SplitMix64 finalizer, used to derive stream identifiers.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

struct NoisySample {
  std::vector<double> y;
  std::vector<double> f;
  double sigma_true = 0.0;
  double snr = 0.0;
  std::uint64_t seed = 0;
};

/// y = f + sigma z with sigma = SD(f)/snr; snr = +infinity gives y = f.
inline NoisySample add_gaussian_noise(std::span<const double> f, double snr, std::uint64_t seed,
                                      std::uint64_t stream = 0) {
  if (!(snr > 0.0)) throw ParameterError("SNR must be positive");
  NoisySample s;
  s.f.assign(f.begin(), f.end());
  s.snr = snr;
  s.seed = seed;
  if (std::isinf(snr)) {
    s.y = s.f;
    return s;
  }
  const double sd = population_sd(f);
  if (!(sd > 0.0)) throw DataError("degenerate signal: noise level SD(f)/SNR needs SD(f) > 0");
  s.sigma_true = sd / snr;
  const NormalStream z(seed, stream);
  s.y.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) s.y[i] = f[i] + s.sigma_true * z(i);
  return s;
}

inline double estimate_snr(std::span<const double> f_hat, double sigma_hat) {
  if (!(sigma_hat > 0.0)) throw DataError("degenerate noise estimate: sigma_hat must be positive");
  return population_sd(f_hat) / sigma_hat;
}

// ---------------------------------------------------------------------------------------------
// Delimited-text ingestion

/// Column by zero-based index or by header name.
using ColumnSelector = std::variant<std::size_t, std::string>;

namespace detail {

inline std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
  };
  if (line.find(',') != std::string::npos || line.find(';') != std::string::npos) {
    const char delim = line.find(',') != std::string::npos ? ',' : ';';
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(delim, start);
      cells.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  } else {
    std::istringstream in(line);
    std::string cell;
    while (in >> cell) cells.push_back(cell);
  }
  return cells;
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Reads one numeric column of a comma-, semicolon- or whitespace-delimited file.
/// A first row whose selected cell is not numeric is treated as a header.
inline std::vector<double> load_series(const std::string& path, const ColumnSelector& column = std::size_t{0}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  std::string line;
  std::vector<double> values;
  std::optional<std::size_t> col;
  if (const auto* idx = std::get_if<std::size_t>(&column)) col = *idx;
  std::size_t row = 0;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.front() == '#') continue;
    const auto cells = detail::split_cells(line);
    if (first_row) {
      first_row = false;
      if (const auto* name = std::get_if<std::string>(&column)) {
        const auto it = std::find(cells.begin(), cells.end(), *name);
        if (it == cells.end()) throw DataError("'" + path + "': header has no column named '" + *name + "'");
        col = static_cast<std::size_t>(it - cells.begin());
        continue;
      }
      if (*col < cells.size() && !detail::parse_number(cells[*col])) continue;  // header row
    }
    if (*col >= cells.size())
      throw DataError("'" + path + "' row " + std::to_string(row) + ": missing column " + std::to_string(*col + 1));
    const auto v = detail::parse_number(cells[*col]);
    if (!v)
      throw DataError("'" + path + "' row " + std::to_string(row) + ", column " + std::to_string(*col + 1) +
                      ": non-numeric cell '" + cells[*col] + "'");
    values.push_back(*v);
  }
  if (values.empty()) throw DataError("'" + path + "': selected column is empty");
  return values;
}

enum class DyadicPolicy { error, truncate, reflect_pad };

inline DyadicPolicy parse_dyadic_policy(const std::string& s) {
  if (s == "error") return DyadicPolicy::error;
  if (s == "truncate") return DyadicPolicy::truncate;
  if (s == "reflect-pad") return DyadicPolicy::reflect_pad;
  throw ParameterError("unknown dyadic policy '" + s + "' (expected error, truncate or reflect-pad)");
}

/// Dyadic-length series plus what is needed to crop results back to the input length.
struct DyadicSeries {
  std::vector<double> values;
  std::size_t original_length = 0;
  DyadicPolicy policy = DyadicPolicy::error;

  /// Crops a result on the dyadic grid back to the retained prefix of the original series.
  std::vector<double> restore(std::span<const double> v) const {
    if (v.size() != values.size()) throw StructuralError("restore: length differs from the dyadic series");
    const std::size_t keep = std::min(original_length, v.size());
    return {v.begin(), v.begin() + static_cast<std::ptrdiff_t>(keep)};
  }
};

inline DyadicSeries to_dyadic(std::span<const double> v, DyadicPolicy policy) {
  if (v.size() < 2) throw DataError("series needs at least two values");
  DyadicSeries s;
  s.original_length = v.size();
  s.policy = policy;
  if (dyadic_exponent(v.size()) >= 0) {
    s.values.assign(v.begin(), v.end());
    return s;
  }
  switch (policy) {
    case DyadicPolicy::error:
      throw DataError("dyadic length required: series has " + std::to_string(v.size()) +
                      " values (use truncate or reflect-pad)");
    case DyadicPolicy::truncate: {
      const std::size_t m = std::bit_floor(v.size());
      s.values.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
      return s;
    }
    case DyadicPolicy::reflect_pad: {
      const std::size_t n = v.size(), m = std::bit_ceil(n);
      s.values.assign(v.begin(), v.end());
      // mirror about the last sample without repeating it: v[n-2], v[n-3], ...
      const std::size_t period = 2 * (n - 1);
      for (std::size_t i = n; i < m; ++i) {
        const std::size_t r = i % period;
        s.values.push_back(v[r < n ? r : period - r]);
      }
      return s;
    }
  }
  return s;
}

}  // namespace rcshrink
