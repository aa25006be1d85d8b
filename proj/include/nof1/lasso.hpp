#pragma once

// L1-budgeted regression of blip pseudo-outcomes on zero-order indicator
// basis functions knotted at the observed contexts:
//
//   B(c) = b0 + sum_{s, t} beta_{s,t} * 1{c_s >= ctilde_s(t)},   |b0| + sum|beta| <= M
//
// s ranges over the non-empty subsets of context coordinates, ctilde(t) over
// the observed contexts. The intercept is the basis function with the empty
// subset, so it is penalized and counts toward the budget like any other term.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "nof1/core.hpp"

namespace nof1 {

struct BasisFunction {
  std::vector<std::size_t> subset;  // sorted coordinates; empty = intercept
  std::vector<double> knot;         // knot value per coordinate in `subset`

  bool operator()(std::span<const double> context) const;
  friend bool operator==(const BasisFunction&, const BasisFunction&) = default;
};

struct BlipRow {
  std::vector<double> context;
  double pseudo_outcome = 0.0;
};

struct BlipModel {
  double intercept = 0.0;
  std::vector<BasisFunction> basis;  // non-intercept terms with nonzero coefficient
  std::vector<double> coefficients;
  double l1_bound = 0.0;
  double penalty = 0.0;  // Lagrangian multiplier that met the budget
  std::size_t dim = 0;

  double predict(std::span<const double> context) const;
  double l1_norm() const;
};

struct LassoOptions {
  double cd_tolerance = 1e-13;
  int max_sweeps = 200000;
  double budget_tolerance = 1e-6;
  int max_bisections = 200;
};

inline constexpr double kUnboundedL1 = std::numeric_limits<double>::infinity();

// Intercept first, then for every non-empty subset (in bitmask order) one
// indicator per distinct observed knot, in row order.
std::vector<BasisFunction> indicator_basis(std::span<const BlipRow> rows);

BlipModel fit_blip_lasso(std::span<const BlipRow> rows, double l1_bound,
                         const LassoOptions& options = {});

// Same problem restricted to a fixed basis (which must start with the
// intercept).
BlipModel fit_blip_lasso_on_basis(std::span<const BlipRow> rows,
                                  const std::vector<BasisFunction>& basis,
                                  double l1_bound, const LassoOptions& options = {});

// Pointwise percentile band from refits on bootstrap resamples with the
// selected basis held fixed.
class BlipCI {
 public:
  BlipCI() = default;
  BlipCI(std::vector<BlipModel> replicates, double level);

  double level() const { return level_; }
  std::size_t replicates() const { return replicates_.size(); }
  std::vector<double> evaluations(std::span<const double> context) const;
  // Half the spread between the (1-level)/2 and (1+level)/2 percentiles.
  double half_width(std::span<const double> context) const;

 private:
  std::vector<BlipModel> replicates_;
  double level_ = 0.95;
};

BlipCI bootstrap_blip_ci(const BlipModel& fit, std::span<const BlipRow> rows,
                         std::size_t n_boot, double level, Rng& rng,
                         const LassoOptions& options = {});

// Linear-interpolation sample quantile (R type 7) of unsorted values.
double sample_quantile(std::vector<double> values, double prob);

}  // namespace nof1
