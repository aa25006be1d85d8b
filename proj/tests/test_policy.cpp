#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "nof1/policy.hpp"

using namespace nof1;

namespace {

// Fitted outcome whose blip is a fixed constant: main-terms layout with
// only the treatment coefficient set, so the blip is expit(b) - 1/2.
std::shared_ptr<const FittedOutcome> constant_blip_source(double blip) {
  FittedOutcome f;
  f.candidate = {CandidateKind::kGlmMain, 0};
  f.glm.layout = FeatureLayout::main_terms(1);
  f.glm.coefficients = {0.0, std::log((0.5 + blip) / (0.5 - blip)), 0.0};
  f.q_bounds = {1e-9, 1 - 1e-9};
  return std::make_shared<const FittedOutcome>(f);
}

ContextSummary ctx() { return {{0.0}, 0}; }

}  // namespace

TEST(Smoother, ReferenceValues) {
  EXPECT_EQ(smoother(0.0, 0.1, 0.05), 0.5);
  EXPECT_EQ(smoother(0.0, 0.37, 2.0), 0.5);
  EXPECT_NEAR(smoother(0.05, 0.1, 0.05), 0.9, 1e-15);
  EXPECT_EQ(smoother(-0.05, 0.1, 0.05), 0.1);
  EXPECT_NEAR(smoother(0.025, 0.1, 0.05), 0.775, 1e-15);
  EXPECT_NEAR(smoother(0.025, 0.1, 0.05),
              -1600 * std::pow(0.025, 3) + 12 * 0.025 + 0.5, 1e-15);
}

TEST(Smoother, RejectsBadParameters) {
  EXPECT_THROW(smoother(0.0, 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(smoother(0.0, 0.6, 0.1), std::invalid_argument);
  EXPECT_THROW(smoother(0.0, 0.1, 0.0), std::invalid_argument);
}

TEST(Smoother, ProbabilityBoundsExact) {
  Rng rng(2718);
  for (int i = 0; i < 100000; ++i) {
    const double blip = 2.0 * uniform01(rng) - 1.0;
    const double c = 0.5 * (1.0 - uniform01(rng));  // (0, 0.5]
    const double e = 1.0 - uniform01(rng);          // (0, 1]
    const double g1 = smoother(blip, c, e);
    const int d = rule_decision(blip);
    const double g_d = d == 1 ? g1 : 1.0 - g1;
    const double g_other = d == 1 ? 1.0 - g1 : g1;
    ASSERT_GE(g_d, 0.5) << blip << " " << c << " " << e;
    ASSERT_GE(g_other, c) << blip << " " << c << " " << e;
  }
}

TEST(Smoother, ContinuousAtWindowEdges) {
  Rng rng(31);
  for (int i = 0; i < 1000; ++i) {
    const double c = 0.5 * (1.0 - uniform01(rng));
    const double e = 1.0 - uniform01(rng);
    EXPECT_NEAR(smoother(-e + 1e-9, c, e), c, 1e-6);
    EXPECT_NEAR(smoother(e - 1e-9, c, e), 1.0 - c, 1e-6);
  }
}

TEST(Smoother, Monotone) {
  for (double c : {0.01, 0.1, 0.25, 0.5}) {
    for (double e : {0.01, 0.05, 0.5, 1.0}) {
      double previous = smoother(-1.0, c, e);
      for (int k = 1; k <= 10000; ++k) {
        const double x = -1.0 + 2.0 * k / 10000.0;
        const double g = smoother(x, c, e);
        EXPECT_GE(g, previous);
        EXPECT_GE(g, c);
        EXPECT_LE(g, 1.0 - c);
        previous = g;
      }
    }
  }
}

TEST(TreatmentProb, Modes) {
  PolicyState balanced{PolicyMode::kBalanced, 0.1, 0.05, nullptr};
  EXPECT_EQ(treatment_prob(balanced, ctx()), 0.5);

  PolicyState smooth{PolicyMode::kSmoother, 0.1, 0.05, constant_blip_source(0.31757)};
  EXPECT_NEAR(treatment_prob(smooth, ctx()), 0.9, 1e-15);
  smooth.blip_source = constant_blip_source(0.025);
  EXPECT_NEAR(treatment_prob(smooth, ctx()), 0.775, 1e-9);

  PolicyState missing{PolicyMode::kSmoother, 0.1, 0.05, nullptr};
  EXPECT_THROW(treatment_prob(missing, ctx()), StateError);
  PolicyState no_band{PolicyMode::kHalCi, 0.1, 0.05, constant_blip_source(0.01)};
  EXPECT_THROW(treatment_prob(no_band, ctx()), StateError);
}

TEST(TreatmentProb, HalCiWithZeroWidthMatchesSmoother) {
  FittedOutcome f = *constant_blip_source(0.0);
  BlipModel constant;
  constant.dim = 1;
  constant.intercept = 0.02;
  f.blip_model = constant;
  f.blip_ci = BlipCI(std::vector<BlipModel>(10, constant), 0.95);
  auto source = std::make_shared<const FittedOutcome>(f);
  PolicyState hal{PolicyMode::kHalCi, 0.1, 0.05, source};
  PolicyState smooth{PolicyMode::kSmoother, 0.1, 0.05, source};
  EXPECT_EQ(treatment_prob(hal, ctx()), treatment_prob(smooth, ctx()));

  // A wide band widens the window and pulls g toward 1/2.
  BlipModel spread = constant;
  std::vector<BlipModel> reps;
  for (int k = 0; k < 41; ++k) {
    spread.intercept = -0.5 + k / 40.0;
    reps.push_back(spread);
  }
  f.blip_ci = BlipCI(reps, 0.95);
  PolicyState wide{PolicyMode::kHalCi, 0.1, 0.05, std::make_shared<const FittedOutcome>(f)};
  const double width = f.blip_ci->half_width(std::vector<double>{0.0});
  EXPECT_GT(width, 0.05);
  EXPECT_EQ(treatment_prob(wide, ctx()), smoother(0.02, 0.1, width));
}

TEST(DrawAction, DegenerateAndFrequency) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(draw_action(0.0, rng), 0);
    EXPECT_EQ(draw_action(1.0, rng), 1);
  }
  const int draws = 100000;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) sum += draw_action(0.9, rng);
  EXPECT_NEAR(sum / draws, 0.9, 0.003);

  Rng r1(55), r2(55);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(draw_action(0.5, r1), draw_action(0.5, r2));
}

TEST(RuleDecision, TieGoesToControl) {
  EXPECT_EQ(rule_decision(0.0), 0);
  EXPECT_EQ(rule_decision(-0.0), 0);
  EXPECT_EQ(rule_decision(1e-300), 1);
  EXPECT_EQ(rule_decision(-0.2), 0);
}
