#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rcshrink/policies.hpp"
#include "rcshrink/signals.hpp"

using namespace rcshrink;

namespace {

std::vector<double> gaussian(std::size_t n, double sd, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = z(gen);
  return v;
}

// two-fold CV loss written from the definition
double cv_loss(const std::vector<double>& y, const QuadratureFilter& f, int j0, double lambda) {
  const std::size_t h = y.size() / 2;
  std::vector<double> ev(h), od(h);
  for (std::size_t i = 0; i < h; ++i) {
    ev[i] = y[2 * i];
    od[i] = y[2 * i + 1];
  }
  auto smooth = [&](const std::vector<double>& v) {
    auto d = forward(v, f, j0);
    for (auto& lv : d.details)
      for (double& c : lv) c = c > lambda ? c - lambda : (c < -lambda ? c + lambda : 0.0);
    return inverse(d, f);
  };
  const auto ge = smooth(ev), go = smooth(od);
  double s = 0.0;
  for (std::size_t i = 0; i < h; ++i) {
    const double po = 0.5 * (ge[i] + ge[(i + 1) % h]);
    const double pe = 0.5 * (go[(i + h - 1) % h] + go[i]);
    s += (po - od[i]) * (po - od[i]) + (pe - ev[i]) * (pe - ev[i]);
  }
  return s;
}

ThresholdPolicy policy(PolicyKind k, double q = 0.05, std::optional<PolicyScope> scope = std::nullopt) {
  return {k, q, scope};
}

}  // namespace

TEST(EstimateSigma, MedianOfFinestLevel) {
  auto d = WaveletDecomposition::zeros(3, 1);
  const std::vector<double> finest{0.5, -1.0, 2.0, -3.0};
  std::copy(finest.begin(), finest.end(), d.level(2).begin());
  EXPECT_DOUBLE_EQ(estimate_sigma(d), 1.5 / 0.6745);
}

TEST(EstimateSigma, RecoversGaussianNoiseLevel) {
  const auto y = gaussian(4096, 2.0, 7);
  const auto d = forward(y, build_filter(10), 3);
  EXPECT_NEAR(estimate_sigma(d), 2.0, 0.1);
}

TEST(EstimateSigma, ScaleEquivariant) {
  const auto y = gaussian(512, 1.0, 8);
  auto z = y;
  for (double& v : z) v *= 5.0;
  const auto f = build_filter(4);
  EXPECT_NEAR(estimate_sigma(forward(z, f, 2)), 5.0 * estimate_sigma(forward(y, f, 2)), 1e-12);
}

TEST(Elicitation, AlphaSchedule) {
  EXPECT_EQ(elicit_alpha(3, 3), 0.0);
  EXPECT_DOUBLE_EQ(elicit_alpha(4, 3), 0.75);
  EXPECT_DOUBLE_EQ(elicit_alpha(5, 3), 1.0 - 1.0 / 9.0);
  EXPECT_DOUBLE_EQ(elicit_alpha(4, 3, 1.0), 0.5);
  EXPECT_THROW(elicit_alpha(2, 3), ParameterError);
  EXPECT_THROW(elicit_alpha(4, 3, 0.0), ParameterError);
  const auto m = alpha_by_level(WaveletDecomposition::zeros(6, 2));
  ASSERT_EQ(m.size(), 4u);
  EXPECT_EQ(m.begin()->first, 2);
  EXPECT_DOUBLE_EQ(m.at(5), 1.0 - 1.0 / 16.0);
}

TEST(Elicitation, TauIsLargestDetail) {
  auto d = WaveletDecomposition::zeros(4, 1);
  d.level(2)[1] = -4.5;
  d.level(3)[6] = 4.0;
  d.scaling[0] = 100.0;
  EXPECT_EQ(elicit_tau(d), 4.5);
  EXPECT_EQ(elicit_tau(WaveletDecomposition::zeros(4, 1)), 0.0);
}

TEST(Universal, Formula) {
  EXPECT_DOUBLE_EQ(universal_threshold(1.0, 1024), std::sqrt(2.0 * std::log(1024.0)));
  EXPECT_DOUBLE_EQ(universal_threshold(2.5, 64), 2.5 * std::sqrt(2.0 * std::log(64.0)));
  EXPECT_THROW(universal_threshold(1.0, 1), ParameterError);
}

TEST(Fdr, MatchesBruteForce) {
  std::mt19937_64 gen(21);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<double> d(100 + 13 * trial);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = z(gen) + (i % 9 == 0 ? 4.0 + trial % 5 : 0.0);
    for (double q : {0.01, 0.05, 0.2})
      EXPECT_NEAR(fdr_threshold(d, 1.3, q), oracle::fdr_bruteforce(d, 1.3, q), 1e-9) << trial << " " << q;
  }
}

TEST(Fdr, NoDiscoveryFallsBackToUniversal) {
  const std::vector<double> d(256, 0.0);
  EXPECT_DOUBLE_EQ(fdr_threshold(d, 1.0, 0.05), universal_threshold(1.0, 256));
}

TEST(Fdr, ScaleInvariantAndMonotoneInQ) {
  const auto d = gaussian(500, 1.0, 3);
  auto big = d;
  for (std::size_t i = 0; i < big.size(); i += 10) big[i] += 6.0;
  auto scaled = big;
  for (double& v : scaled) v *= 3.0;
  EXPECT_NEAR(fdr_threshold(scaled, 3.0, 0.05), 3.0 * fdr_threshold(big, 1.0, 0.05), 1e-10);
  double prev = 1e300;
  for (double q : {0.001, 0.01, 0.05, 0.1, 0.3}) {
    const double t = fdr_threshold(big, 1.0, q);
    EXPECT_LE(t, prev + 1e-12);
    prev = t;
  }
  EXPECT_THROW(fdr_threshold(big, 1.0, 1.0), ParameterError);
  EXPECT_THROW(fdr_threshold(std::vector<double>{}, 1.0, 0.05), StructuralError);
}

TEST(Sure, ObjectiveExact) {
  const std::vector<double> d{0.5, -2.0, 3.0};
  // 3 - 2*1 + (0.25 + 1 + 1)
  EXPECT_DOUBLE_EQ(sure_objective(d, 1.0, 1.0), 3.25);
  EXPECT_DOUBLE_EQ(sure_objective(d, 1.0, 0.0), 3.0 + 0.0);
  EXPECT_DOUBLE_EQ(sure_objective(d, 2.0, 2.0), 12.0 - 16.0 + 0.25 + 4.0 + 4.0);
}

TEST(Sure, ArgminMatchesBruteForceOnDenseLevels) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> d(64);
    for (double& v : d) v = z(gen) + 3.0 * z(gen);
    EXPECT_DOUBLE_EQ(sure_threshold(d, 1.0), oracle::sure_bruteforce_argmin(d, 1.0)) << trial;
  }
}

TEST(Sure, SparseLevelsUseUniversal) {
  const std::vector<double> zero(128, 0.0);
  EXPECT_DOUBLE_EQ(sure_threshold(zero, 1.0), universal_threshold(1.0, 128));
  const std::vector<double> one{0.1};
  EXPECT_DOUBLE_EQ(sure_threshold(one, 1.0), universal_threshold(1.0, 2));
}

TEST(CrossValidation, PureNoiseAgreesWithGridOracle) {
  const auto y = gaussian(512, 1.0, 99);
  const auto f = build_filter(10);
  const CrossValidation cv(y, f, 3);
  const auto m = cv.minimize();
  const double hi = cv.search_upper();
  EXPECT_NEAR(cv.sigma_hat(), estimate_sigma(forward(y, f, 3)), 1e-15);
  double best = 1e300, best_lam = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double lam = hi * i / 199.0;
    const double v = cv_loss(y, f, 3, lam);
    EXPECT_NEAR(cv.objective(lam), v, 1e-9 * std::max(1.0, v));
    if (v < best) {
      best = v;
      best_lam = lam;
    }
  }
  EXPECT_LE(m.objective, best + 1e-9);
  EXPECT_NEAR(m.lambda_half, best_lam, 0.05 * hi);
  EXPECT_NEAR(cv_threshold(y, f, 3), cv.rescale(m.lambda_half), 1e-15);
  EXPECT_DOUBLE_EQ(cv.rescale(1.0), 1.0 / std::sqrt(1.0 - std::log(2.0) / std::log(512.0)));
}

TEST(CrossValidation, NearNoiselessSignalKeepsDetail) {
  const auto f0 = make_test_signal(TestFunctionName::heavisine, 1024).values;
  auto y = f0;
  const auto e = gaussian(1024, 1e-4, 5);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += e[i];
  const auto f = build_filter(10);
  double maxd = 0.0;
  for (const auto& lv : forward(y, f, 3).details)
    for (double v : lv) maxd = std::max(maxd, std::abs(v));
  EXPECT_LE(cv_threshold(y, f, 3), 0.01 * maxd);
}

TEST(CrossValidation, RejectsShortSeries) {
  const std::vector<double> y(4, 1.0);
  EXPECT_THROW(CrossValidation(y, build_filter(1), 0), ParameterError);
}

TEST(SelectThreshold, ScopesAndPolicies) {
  const auto f = build_filter(4);
  auto y = gaussian(256, 1.0, 12);
  for (std::size_t i = 40; i < 60; ++i) y[i] += 8.0;
  const auto d = forward(y, f, 2);
  const auto all = LevelRange::all(d);

  const auto uni = select_threshold(d, f, policy(PolicyKind::universal), 1.0, all);
  ASSERT_EQ(uni.size(), 6u);
  for (const auto& [j, t] : uni) EXPECT_DOUBLE_EQ(t, universal_threshold(1.0, 256));

  const auto uni_lv = select_threshold(d, f, policy(PolicyKind::universal, 0.05, PolicyScope::by_level), 1.0, all);
  EXPECT_DOUBLE_EQ(uni_lv.at(2), universal_threshold(1.0, 4));
  EXPECT_DOUBLE_EQ(uni_lv.at(7), universal_threshold(1.0, 128));

  std::vector<double> pooled;
  for (int j = 2; j <= 7; ++j) pooled.insert(pooled.end(), d.level(j).begin(), d.level(j).end());
  const auto fdr = select_threshold(d, f, policy(PolicyKind::fdr, 0.1), 1.0, all);
  for (const auto& [j, t] : fdr) EXPECT_DOUBLE_EQ(t, fdr_threshold(pooled, 1.0, 0.1));

  const auto sure = select_threshold(d, f, policy(PolicyKind::sure), 1.0, all);
  for (const auto& [j, t] : sure) EXPECT_DOUBLE_EQ(t, sure_threshold(d.level(j), 1.0));
  const auto sure_g = select_threshold(d, f, policy(PolicyKind::sure, 0.05, PolicyScope::global), 1.0, all);
  for (const auto& [j, t] : sure_g) EXPECT_DOUBLE_EQ(t, sure_threshold(pooled, 1.0));

  const auto cv = select_threshold(d, f, policy(PolicyKind::cv), 1.0, all);
  const double expected_cv = cv_threshold(inverse(d, f), f, 2);
  for (const auto& [j, t] : cv) EXPECT_DOUBLE_EQ(t, expected_cv);

  EXPECT_THROW(select_threshold(d, f, policy(PolicyKind::cv, 0.05, PolicyScope::by_level), 1.0, all), ParameterError);
  EXPECT_THROW(select_threshold(d, f, policy(PolicyKind::fdr, 0.0), 1.0, all), ParameterError);
  EXPECT_THROW(select_threshold(d, f, policy(PolicyKind::universal), 1.0, LevelRange{1, 7}), StructuralError);
  EXPECT_TRUE(select_threshold(d, f, policy(PolicyKind::universal), 1.0, LevelRange{5, 4}).empty());
}

TEST(SelectThreshold, PolicyNames) {
  for (auto k : {PolicyKind::universal, PolicyKind::fdr, PolicyKind::cv, PolicyKind::sure})
    EXPECT_EQ(parse_policy_kind(to_string(k)), k);
  EXPECT_THROW(parse_policy_kind("minimax"), ParameterError);
}
