#pragma once

// Targeted update of an initial Qbar fit toward the time-averaged mean
// outcome under a (data-adaptive) rule, with the martingale variance
// estimator and Wald interval.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nof1/core.hpp"

namespace nof1 {

// One time step of the targeting problem. g1 is P(A=1 | context) as used at
// assignment; q_a and q_d are the initial predictions at the observed arm and
// at the rule arm d.
struct TmleRow {
  int a = 0;
  double y = 0.0;
  double g1 = 0.5;
  int d = 1;
  double q_a = 0.5;
  double q_d = 0.5;

  double g_of(int arm) const { return arm == 1 ? g1 : 1.0 - g1; }
};

struct TmleOptions {
  double alpha = 0.05;
  double g_floor = 0.01;
  Bounds q_bounds;
  double epsilon_bound = 10.0;
  double score_tolerance = 1e-10;
};

double clever_covariate(int a, int d, double g_of_a, double g_floor);

struct EpsilonFit {
  double epsilon = 0.0;
  bool clamped = false;
  bool degenerate = false;
  int iterations = 0;
};

struct FluctuationRow {
  double y = 0.0;
  double q = 0.5;
  double h = 0.0;
};

// Root of the score sum h * (y - expit(logit q + eps * h)) on
// [-bound, bound]: Newton steps safeguarded by a bisection bracket.
EpsilonFit solve_epsilon(std::span<const FluctuationRow> rows, double bound = 10.0,
                         double score_tolerance = 1e-10);

double fluctuate(double q_init, double h, double epsilon);

double eic_value(double y, double q_star_at_a, int a, int d, double g_of_a,
                 double g_floor);

struct EstimateReport {
  double psi_hat = 0.0;
  double epsilon = 0.0;
  bool epsilon_clamped = false;
  bool epsilon_degenerate = false;
  double sigma2_hat = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double score_residual = 0.0;
  std::size_t n = 0;
  std::vector<double> q_star_d;  // updated rule-arm predictions, per row
  // Running averages of Var(D* | C) at the grid recorded by the caller.
  std::vector<std::pair<std::size_t, double>> cond_var_path;

  double half_width() const { return 0.5 * (ci_upper - ci_lower); }
};

EstimateReport tmle_estimate(std::span<const TmleRow> rows, const TmleOptions& options);

// Running averages (1/n) sum_{t<=n} q*(1-q*)/g(d|C_t) at each n of `grid`
// (1-based, ascending, <= rows.size()).
std::vector<std::pair<std::size_t, double>> cond_var_path(
    std::span<const TmleRow> rows, std::span<const double> q_star_d,
    std::span<const std::size_t> grid);

double normal_quantile(double p);

}  // namespace nof1
