#include <gtest/gtest.h>

#include <cmath>

#include "nof1/lasso.hpp"
#include "oracles.hpp"

using namespace nof1;

namespace {

std::vector<BlipRow> random_rows(Rng& rng, std::size_t n, std::size_t d, bool discrete) {
  std::vector<BlipRow> rows(n);
  for (auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) {
      const double u = uniform01(rng);
      r.context.push_back(discrete ? std::floor(3.0 * u) : u);
    }
    r.pseudo_outcome = 2.0 * uniform01(rng) - 1.0 + (r.context[0] > 0.5 ? 0.8 : 0.0);
  }
  return rows;
}

// Residual correlations (1/n) X_j' r over the full basis.
std::vector<double> correlations(std::span<const BlipRow> rows, const BlipModel& m,
                                 const std::vector<BasisFunction>& basis) {
  std::vector<double> out(basis.size(), 0.0);
  for (const auto& row : rows) {
    const double r = row.pseudo_outcome - m.predict(row.context);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      if (basis[j](row.context)) out[j] += r;
    }
  }
  for (double& v : out) v /= static_cast<double>(rows.size());
  return out;
}

}  // namespace

TEST(IndicatorBasis, AllSubsetsTimesContexts) {
  std::vector<BlipRow> rows = {{{0.1, 0.7}, 0}, {{0.4, 0.2}, 0}, {{0.9, 0.5}, 0}};
  const auto basis = indicator_basis(rows);
  EXPECT_EQ(basis.size(), 1 + 3 * rows.size());
  EXPECT_TRUE(basis.front().subset.empty());
  for (const auto& b : basis) {
    for (std::size_t k = 0; k < b.subset.size(); ++k) {
      bool observed = false;
      for (const auto& r : rows) observed |= r.context[b.subset[k]] == b.knot[k];
      EXPECT_TRUE(observed);
    }
  }
}

TEST(IndicatorBasis, DeduplicatesKnots) {
  std::vector<BlipRow> rows = {{{0.0}, 0}, {{1.0}, 0}, {{1.0}, 0}, {{0.0}, 0}};
  EXPECT_EQ(indicator_basis(rows).size(), 3u);
}

TEST(FitBlipLasso, ZeroBudgetGivesZeroFit) {
  Rng rng(1);
  const auto rows = random_rows(rng, 15, 2, false);
  const auto m = fit_blip_lasso(rows, 0.0);
  EXPECT_EQ(m.intercept, 0.0);
  EXPECT_TRUE(m.coefficients.empty());
  EXPECT_EQ(m.predict(rows[3].context), 0.0);
}

TEST(FitBlipLasso, UnboundedInterpolatesGroupMeans) {
  std::vector<BlipRow> rows = {{{0.0}, 1.0}, {{0.0}, 2.0}, {{1.0}, -1.0},
                               {{1.0}, 0.0}, {{1.0}, 4.0}};
  const auto m = fit_blip_lasso(rows, kUnboundedL1);
  EXPECT_NEAR(m.predict(std::vector<double>{0.0}), 1.5, 1e-9);
  EXPECT_NEAR(m.predict(std::vector<double>{1.0}), 1.0, 1e-9);
  EXPECT_NEAR(m.predict(std::vector<double>{7.0}), 1.0, 1e-9);
}

TEST(FitBlipLasso, RejectsBadInput) {
  std::vector<BlipRow> rows = {{{0.0}, 1.0}, {{0.0, 1.0}, 2.0}};
  EXPECT_THROW(fit_blip_lasso(rows, 1.0), SpecificationError);
  std::vector<BlipRow> ok = {{{0.0}, 1.0}};
  EXPECT_THROW(fit_blip_lasso(ok, -1.0), std::invalid_argument);
  const auto m = fit_blip_lasso(ok, 1.0);
  EXPECT_THROW(m.predict(std::vector<double>{0.0, 1.0}), SpecificationError);
}

TEST(FitBlipLasso, KktAndBudget) {
  Rng rng(77);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t d = 1 + rep % 2;
    const auto rows = random_rows(rng, 6 + rng() % 15, d, rep % 3 == 0);
    const double budget = 0.05 + 2.0 * uniform01(rng);
    const auto m = fit_blip_lasso(rows, budget);
    EXPECT_LE(m.l1_norm(), budget + 1e-6);
    const auto basis = indicator_basis(rows);
    const auto corr = correlations(rows, m, basis);
    for (double c : corr) EXPECT_LE(std::abs(c), m.penalty + 1e-6);
    // Active coordinates sit on the boundary with matching sign.
    if (m.intercept != 0.0) {
      EXPECT_NEAR(corr[0], std::copysign(m.penalty, m.intercept), 1e-6);
    }
    for (std::size_t k = 0; k < m.basis.size(); ++k) {
      const auto it = std::find(basis.begin(), basis.end(), m.basis[k]);
      ASSERT_NE(it, basis.end());
      EXPECT_NEAR(corr[static_cast<std::size_t>(it - basis.begin())],
                  std::copysign(m.penalty, m.coefficients[k]), 1e-6);
    }
  }
}

TEST(FitBlipLasso, MatchesProjectedGradientOracle) {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    const auto rows = random_rows(rng, 12, 2, false);
    const double budget = 0.3 + uniform01(rng);
    const auto m = fit_blip_lasso(rows, budget);
    const auto basis = indicator_basis(rows);
    const Eigen::MatrixXd x = oracle::design(rows, basis);
    Eigen::VectorXd y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y[i] = rows[i].pseudo_outcome;
    const Eigen::VectorXd fitted = x * oracle::l1_ball_least_squares(x, y, budget);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      EXPECT_NEAR(m.predict(rows[i].context), fitted[i], 1e-4);
    }
  }
}

TEST(SampleQuantile, Type7) {
  EXPECT_DOUBLE_EQ(sample_quantile({4, 1, 3, 2}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(sample_quantile({4, 1, 3, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(sample_quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(sample_quantile({5}, 0.3), 5.0);
}

TEST(BootstrapBlipCI, IdenticalRowsGiveZeroWidth) {
  std::vector<BlipRow> rows(10, BlipRow{{0.3, 0.6}, 0.4});
  const auto fit = fit_blip_lasso(rows, 1.0);
  Rng rng(3);
  const auto ci = bootstrap_blip_ci(fit, rows, 20, 0.95, rng);
  EXPECT_EQ(ci.half_width(std::vector<double>{0.3, 0.6}), 0.0);
  EXPECT_EQ(ci.half_width(std::vector<double>{0.0, 0.0}), 0.0);
}

TEST(BootstrapBlipCI, NeedsTwoReplicates) {
  std::vector<BlipRow> rows(5, BlipRow{{0.3}, 0.4});
  const auto fit = fit_blip_lasso(rows, 1.0);
  Rng rng(3);
  EXPECT_THROW(bootstrap_blip_ci(fit, rows, 1, 0.95, rng), std::invalid_argument);
}

TEST(BootstrapBlipCI, HalfWidthIsHalfPercentileSpread) {
  Rng data_rng(9);
  const auto rows = random_rows(data_rng, 20, 2, false);
  const auto fit = fit_blip_lasso(rows, 1.5);
  Rng rng(10);
  const auto ci = bootstrap_blip_ci(fit, rows, 200, 0.95, rng);
  EXPECT_EQ(ci.replicates(), 200u);
  for (const auto& r : rows) {
    const auto values = ci.evaluations(r.context);
    const double expected =
        0.5 * (sample_quantile(values, 0.975) - sample_quantile(values, 0.025));
    EXPECT_GE(ci.half_width(r.context), 0.0);
    EXPECT_DOUBLE_EQ(ci.half_width(r.context), expected);
  }
}
