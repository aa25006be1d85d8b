#pragma once

// Declarative structural-equation simulator for a single time series.
//
// Each block is drawn in node order A -> Y -> W. The outcome equation is a
// logistic model in A(t) and lagged history terms; covariates follow either a
// logistic (binary) or Gaussian (continuous) equation in lagged terms. Because
// the equations are plain coefficient lists, the true conditional mean and the
// true blip are available exactly.

#include <cstddef>
#include <string>
#include <vector>

#include "nof1/core.hpp"

namespace nof1 {

inline constexpr std::size_t kBurnInLength = 4;

struct LinearTerm {
  Variable var;
  int lag = 1;
  double coef = 0.0;
};

struct Marginal {
  enum class Kind { kBernoulli, kNormal };
  Kind kind = Kind::kBernoulli;
  double location = 0.5;  // success probability, or mean
  double scale = 1.0;     // sd (normal only)

  double draw(Rng& rng) const;
};

struct BurnInLaw {
  Marginal a;
  Marginal y;
  std::vector<Marginal> w;
};

struct YEquation {
  double intercept = 0.0;
  double coef_a = 0.0;
  std::vector<LinearTerm> terms;
};

struct WEquation {
  enum class Family { kLogistic, kGaussian };
  Family family = Family::kLogistic;
  double intercept = 0.0;
  std::vector<LinearTerm> terms;
};

struct DgpSpec {
  std::string name;
  BurnInLaw burn_in;
  YEquation y;
  std::vector<WEquation> w;
  double noise_sd = 1.0;

  std::size_t w_dim() const { return w.size(); }
  int max_lag() const;
  // Throws SpecificationError on lags < 1, mismatched W dimensions, or
  // non-positive noise.
  void validate() const;
  // Context carrying exactly the outcome-equation terms, in order; this is the
  // context the truth oracles expect.
  ContextSpec oracle_context() const;
};

// Structural equations of the two built-in designs.
DgpSpec sim1a_dgp();
DgpSpec sim1b_dgp();
// Resolves "sim1a" / "sim1b"; throws ConfigError("dgp_id", ...) otherwise.
DgpSpec dgp_preset(const std::string& name);

double expit(double x);
double logit(double p);

std::vector<Block> simulate_burn_in(const DgpSpec& spec, Rng& rng);

// Draws block t = history.size() + 1 with the supplied treatment.
Block step(const DgpSpec& spec, const TrialHistory& history, int a, Rng& rng);

double true_conditional_mean(const DgpSpec& spec, const ContextSummary& context,
                             int a);
double true_blip(const DgpSpec& spec, const ContextSummary& context);

}  // namespace nof1
