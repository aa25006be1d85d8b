#pragma once

// Logistic working model for Qbar(C, A) = E[Y | C, A], fitted by IRLS on the
// quasi-binomial likelihood (outcomes may be fractional in [0, 1]).

#include <cstddef>
#include <span>
#include <vector>

#include "nof1/core.hpp"

namespace nof1 {

enum class TermRole { kIntercept, kTreatment, kFeature, kTreatmentFeature };

struct LayoutTerm {
  TermRole role = TermRole::kIntercept;
  std::size_t feature = 0;
};

struct FeatureLayout {
  std::vector<LayoutTerm> terms;
  std::size_t n_features = 0;

  static FeatureLayout intercept_only(std::size_t n_features);
  // intercept, A, C_1..C_d
  static FeatureLayout main_terms(std::size_t n_features);
  // main terms followed by A*C_1..A*C_d
  static FeatureLayout with_interactions(std::size_t n_features);

  std::size_t size() const { return terms.size(); }
  double value(std::size_t term, std::span<const double> features, int a) const;
};

struct DesignRow {
  std::vector<double> features;
  int a = 0;
  double y = 0.0;
};

struct WorkingModel {
  std::vector<double> coefficients;
  FeatureLayout layout;
  bool converged = false;
  bool ridge_fallback = false;
  int iterations = 0;

  double linear_predictor(std::span<const double> features, int a) const;
};

struct LogisticOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
  double ridge_penalty = 1e-4;
};

// Maximizes the (weighted) quasi-binomial log-likelihood. When IRLS fails to
// converge (complete separation, singular information) the fit is redone with
// a ridge penalty on all coefficients and `ridge_fallback` is set.
WorkingModel fit_logistic(std::span<const DesignRow> rows, const FeatureLayout& layout,
                          std::span<const double> weights = {},
                          const LogisticOptions& options = {});

double predict_qbar(const WorkingModel& model, const ContextSummary& context, int a,
                    const Bounds& q_bounds);

double blip_of(const WorkingModel& model, const ContextSummary& context,
               const Bounds& q_bounds);

}  // namespace nof1
