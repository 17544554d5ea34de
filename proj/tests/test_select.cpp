#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vinedep/bicop.hpp"
#include "vinedep/select.hpp"

using namespace vinedep;

namespace {

Matrix draw(const CopulaSpec& spec, Eigen::Index n, std::uint64_t seed) { return sample(spec, n, seed); }

void expect_aic_identity(const EdgeFit& f) {
  EXPECT_TRUE(std::isfinite(f.loglik));
  EXPECT_EQ(f.n_params, param_count(f.spec.family));
  EXPECT_NEAR(f.aic, 2.0 * f.n_params - 2.0 * f.loglik, 1e-9 * (1.0 + std::abs(f.aic)));
}

// Golden-section maximiser, used with the oracle log density.
double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 200 && b - a > 1e-9; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

const std::vector<Candidate> kFour{{Family::Clayton, Rotation::R0},
                                   {Family::Gumbel, Rotation::R0},
                                   {Family::Frank, Rotation::R0},
                                   {Family::Gaussian, Rotation::R0}};

}  // namespace

TEST(IndependenceTest, Statistic) {
  const double coef = std::sqrt(9.0 * 6000.0 * 5999.0 / (2.0 * 12005.0));
  EXPECT_NEAR(coef, 116.156, 1e-3);
  EXPECT_NEAR(independence_statistic(0.0172, 6000), coef * 0.0172, 1e-12);
  EXPECT_NEAR(independence_statistic(0.0172, 6000), 1.998, 1e-3);
  EXPECT_TRUE(independence_test(0.0172, 6000));
  EXPECT_TRUE(independence_test(-0.0172, 6000));
  EXPECT_NEAR(independence_statistic(0.35, 6000), 40.65, 0.05);
  EXPECT_FALSE(independence_test(0.35, 6000));
  for (std::size_t n : {10u, 100u, 6000u}) EXPECT_TRUE(independence_test(0.0, n));
}

TEST(IndependenceTest, ThresholdIsTwo) {
  const std::size_t n = 500;
  const double tau_at_two = 2.0 / independence_statistic(1.0, n);
  EXPECT_TRUE(independence_test(tau_at_two * (1 - 1e-9), n));
  EXPECT_FALSE(independence_test(tau_at_two * (1 + 1e-9), n));
}

TEST(Mle, ClaytonRecoveryMatchesOracle) {
  const Matrix x = draw({Family::Clayton, Rotation::R0, {2.0}}, 5000, 11);
  const EdgeFit f = fit_bicop_mle(x.col(0), x.col(1), Family::Clayton, Rotation::R0);
  expect_aic_identity(f);
  EXPECT_NEAR(theoretical_tau(f.spec), 0.5, 0.02);

  auto ll = [&](double th) {
    double s = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) s += oracle::clayton_log_density(x(i, 0), x(i, 1), th);
    return s;
  };
  const double th = golden_max(ll, 0.5, 6.0);
  EXPECT_NEAR(f.spec.params[0], th, 1e-4);
  EXPECT_NEAR(f.loglik, ll(th), 1e-6 * std::abs(ll(th)));
  // Stationarity: the oracle derivative vanishes at the reported optimum.
  const double grad = oracle::central_diff(ll, f.spec.params[0], 1e-5);
  EXPECT_LT(std::abs(grad) / x.rows(), 1e-3);
}

TEST(Mle, IndependenceData) {
  const Matrix x = draw({Family::Independence, Rotation::R0, {}}, 5000, 12);
  for (const auto& c : std::vector<Candidate>{{Family::Gaussian, Rotation::R0},
                                              {Family::Frank, Rotation::R0},
                                              {Family::Clayton, Rotation::R0},
                                              {Family::Gumbel, Rotation::R0}}) {
    const EdgeFit f = fit_bicop_mle(x.col(0), x.col(1), c.family, c.rotation);
    expect_aic_identity(f);
    EXPECT_NEAR(theoretical_tau(f.spec), 0.0, 0.02) << display_name(f.spec);
  }
  const EdgeFit ind = fit_bicop_mle(x.col(0), x.col(1), Family::Independence, Rotation::R0);
  EXPECT_EQ(ind.loglik, 0.0);
  EXPECT_EQ(ind.aic, 0.0);
}

TEST(Mle, GumbelTableValue) {
  const Matrix x = draw({Family::Gumbel, Rotation::R0, {1.21}}, 5000, 13);
  const EdgeFit f = fit_bicop_mle(x.col(0), x.col(1), Family::Gumbel, Rotation::R0);
  EXPECT_NEAR(theoretical_tau(f.spec), 0.17, 0.02);
  EXPECT_NEAR(f.spec.params[0], 1.21, 0.05);
}

TEST(Mle, RotatedFits) {
  for (Rotation r : {Rotation::R90, Rotation::R180, Rotation::R270}) {
    const Matrix x = draw({Family::Clayton, r, {2.0}}, 4000, 14 + static_cast<int>(r));
    const EdgeFit f = fit_bicop_mle(x.col(0), x.col(1), Family::Clayton, r);
    EXPECT_EQ(f.spec.rotation, r);
    EXPECT_NEAR(f.spec.params[0], 2.0, 0.15) << static_cast<int>(r);
  }
}

TEST(Mle, TwoParameterRecovery) {
  {
    const Matrix x = draw({Family::StudentT, Rotation::R0, {0.5, 5.0}}, 4000, 21);
    const EdgeFit f = fit_bicop_mle(x.col(0), x.col(1), Family::StudentT, Rotation::R0);
    expect_aic_identity(f);
    EXPECT_NEAR(f.spec.params[0], 0.5, 0.04);
    EXPECT_GT(f.spec.params[1], 3.0);
    EXPECT_LT(f.spec.params[1], 9.0);
  }
  for (const CopulaSpec& truth : {CopulaSpec{Family::BB7, Rotation::R0, {1.5, 1.2}},
                                  CopulaSpec{Family::BB8, Rotation::R0, {3.0, 0.7}},
                                  CopulaSpec{Family::Tawn1, Rotation::R0, {2.5, 0.6}}}) {
    const Matrix x = draw(truth, 4000, 22);
    const EdgeFit f = fit_bicop_mle(x.col(0), x.col(1), truth.family, Rotation::R0);
    expect_aic_identity(f);
    EXPECT_NEAR(theoretical_tau(f.spec), theoretical_tau(truth), 0.03) << display_name(truth);
    // The fitted value must beat the truth on its own sample.
    double ll_true = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) ll_true += log_density(truth, x(i, 0), x(i, 1));
    EXPECT_GE(f.loglik, ll_true - 1e-6) << display_name(truth);
  }
}

TEST(Mle, InputChecks) {
  const Matrix x = draw({Family::Clayton, Rotation::R0, {2.0}}, 40, 3);
  EXPECT_THROW(fit_bicop_mle(x.col(0).head(29), x.col(1).head(29), Family::Clayton, Rotation::R0), Error);
  EXPECT_THROW(fit_bicop_mle(x.col(0), x.col(1).head(39), Family::Clayton, Rotation::R0), Error);
  Vector bad = x.col(0);
  bad[0] = 1.0;
  EXPECT_THROW(fit_bicop_mle(bad, x.col(1), Family::Clayton, Rotation::R0), Error);
}

TEST(Select, SingleCandidate) {
  const Matrix x = draw({Family::Gaussian, Rotation::R0, {0.6}}, 500, 4);
  const std::vector<Candidate> one{{Family::Frank, Rotation::R0}};
  const EdgeFit f = select_family_aic(x.col(0), x.col(1), one);
  EXPECT_EQ(f.spec.family, Family::Frank);
  expect_aic_identity(f);
  const std::vector<Candidate> none;
  try {
    select_family_aic(x.col(0), x.col(1), none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllCandidatesFailed);
  }
}

TEST(Select, PicksSmallestAic) {
  const Matrix x = draw({Family::Gumbel, Rotation::R0, {1.8}}, 2000, 5);
  const EdgeFit best = select_family_aic(x.col(0), x.col(1), kFour);
  for (const Candidate& c : kFour) {
    const EdgeFit f = fit_bicop_mle(x.col(0), x.col(1), c.family, c.rotation);
    EXPECT_LE(best.aic, f.aic + 1e-9);
  }
}

TEST(Select, ClaytonConsistency) {
  int hits = 0;
  for (int s = 0; s < 100; ++s) {
    const Matrix x = draw({Family::Clayton, Rotation::R0, {2.0}}, 5000, 1000 + s);
    const EdgeFit f = select_family_aic(x.col(0), x.col(1), kFour);
    expect_aic_identity(f);
    hits += f.spec.family == Family::Clayton;
  }
  EXPECT_GE(hits, 95);
}

TEST(Select, GumbelConsistency) {
  int hits = 0;
  for (int s = 0; s < 100; ++s) {
    const Matrix x = draw({Family::Gumbel, Rotation::R0, {2.0}}, 5000, 2000 + s);
    hits += select_family_aic(x.col(0), x.col(1), kFour).spec.family == Family::Gumbel;
  }
  EXPECT_GE(hits, 90);
}

TEST(Select, GaussianNestedByStudent) {
  for (int s = 0; s < 3; ++s) {
    const Matrix x = draw({Family::Gaussian, Rotation::R0, {0.8}}, 5000, 3000 + s);
    const auto cands = default_candidates(0.59, kAllFamilies);
    const EdgeFit f = select_family_aic(x.col(0), x.col(1), cands);
    EXPECT_TRUE(f.spec.family == Family::Gaussian || f.spec.family == Family::StudentT) << display_name(f.spec);
  }
}

TEST(Select, ReorderInvariance) {
  const Matrix x = draw({Family::Frank, Rotation::R0, {5.0}}, 2000, 6);
  auto cands = default_candidates(0.4, kAllFamilies);
  const EdgeFit ref = select_family_aic(x.col(0), x.col(1), cands);
  std::mt19937 rng(7);
  for (int k = 0; k < 3; ++k) {
    std::shuffle(cands.begin(), cands.end(), rng);
    const EdgeFit f = select_family_aic(x.col(0), x.col(1), cands);
    EXPECT_EQ(f.spec.family, ref.spec.family);
    EXPECT_EQ(f.spec.rotation, ref.spec.rotation);
    EXPECT_NEAR(f.aic, ref.aic, 1e-9 * std::abs(ref.aic));
  }
}

TEST(DefaultCandidates, RotationsFollowTauSign) {
  const auto pos = default_candidates(0.3);
  const auto neg = default_candidates(-0.3);
  for (const auto& c : pos) {
    if (is_rotatable(c.family)) EXPECT_TRUE(c.rotation == Rotation::R0 || c.rotation == Rotation::R180);
    else EXPECT_EQ(c.rotation, Rotation::R0);
  }
  for (const auto& c : neg) {
    if (is_rotatable(c.family)) EXPECT_TRUE(c.rotation == Rotation::R90 || c.rotation == Rotation::R270);
    else EXPECT_EQ(c.rotation, Rotation::R0);
  }
  std::size_t expected = 0;
  for (Family f : kAllFamilies) expected += is_rotatable(f) ? 2 : 1;
  EXPECT_EQ(pos.size(), expected);
  EXPECT_EQ(neg.size(), expected);
  const std::vector<Family> only{Family::Clayton};
  EXPECT_EQ(default_candidates(0.1, only).size(), 2u);
}

TEST(Select, NegativeDependence) {
  const Matrix x = draw({Family::Clayton, Rotation::R90, {3.0}}, 3000, 9);
  const EdgeFit f = select_family_aic(x.col(0), x.col(1), default_candidates(-0.5, kAllFamilies));
  EXPECT_LT(theoretical_tau(f.spec), -0.5);
  EXPECT_TRUE(f.spec.rotation == Rotation::R90 || f.spec.rotation == Rotation::R270 || !is_rotatable(f.spec.family));
}
