#pragma once

// Outcome-regression candidates for Qbar and the blip, and the discrete
// recursive-origin selector that picks among them.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nof1/core.hpp"
#include "nof1/lasso.hpp"
#include "nof1/logistic.hpp"

namespace nof1 {

// One observed time step as seen by the estimators: context, treatment,
// outcome, and the assignment probability P(A=1 | context) used by design.
struct TrainingRow {
  ContextSummary context;
  int a = 0;
  double y = 0.0;
  double g1 = 0.5;
};

struct FitSettings {
  Bounds q_bounds;
  double g_floor = 0.01;
  LogisticOptions logistic;
  LassoOptions lasso;
  bool bootstrap_ci = false;
  std::size_t n_boot = 100;
  double ci_level = 0.95;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

// A fitted candidate. GLM candidates predict through the working model; the
// lasso_blip candidate keeps the main-terms fit for the control arm and adds
// the lasso blip for the treated arm.
struct FittedOutcome {
  CandidateSpec candidate;
  WorkingModel glm;
  std::optional<BlipModel> blip_model;
  std::optional<BlipCI> blip_ci;
  Bounds q_bounds;

  double qbar(const ContextSummary& context, int a) const;
  double blip(const ContextSummary& context) const;
};

FittedOutcome fit_candidate(const CandidateSpec& candidate,
                            std::span<const TrainingRow> rows,
                            const FitSettings& settings, Rng* rng = nullptr);

// Mean quasi-binomial negative log-likelihood of predictions q against y.
double quasi_nll(double y, double q);

struct SelectionResult {
  std::size_t best = 0;
  std::vector<double> validation_loss;  // +inf for candidates that failed
  std::vector<std::string> failures;    // empty string when the fit succeeded
  FittedOutcome model;                  // winner refit on all rows
};

// Trains every candidate on rows[0, N - val_size), scores quasi-NLL on the
// last val_size rows and refits the minimizer (lowest index on ties) on all
// rows. `rng` drives the bootstrap of the refit when settings ask for it.
SelectionResult select_recursive_origin(std::span<const CandidateSpec> candidates,
                                        std::span<const TrainingRow> rows,
                                        std::size_t val_size,
                                        const FitSettings& settings,
                                        Rng* rng = nullptr);

// Doubly-robust blip transform ((2a-1)/g_a)(y - qbar_a) + (qbar1 - qbar0),
// with g_a = g1 for a=1 and 1-g1 for a=0.
double d1_pseudo_outcome(double y, int a, double qbar1, double qbar0, double g1,
                         double g_floor);

}  // namespace nof1
