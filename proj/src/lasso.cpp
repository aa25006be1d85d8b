#include "nof1/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>

namespace nof1 {

namespace {

constexpr std::size_t kMaxContextDim = 16;

// Indicator columns stored as the row indices where the indicator is one.
struct Columns {
  std::vector<std::vector<std::uint32_t>> ones;
  std::vector<double> scale;  // (1/n) * ||column||^2
};

Columns build_columns(std::span<const BlipRow> rows,
                      const std::vector<BasisFunction>& basis) {
  const double n = static_cast<double>(rows.size());
  Columns cols;
  cols.ones.resize(basis.size());
  cols.scale.resize(basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (basis[j](rows[i].context)) {
        cols.ones[j].push_back(static_cast<std::uint32_t>(i));
      }
    }
    cols.scale[j] = static_cast<double>(cols.ones[j].size()) / n;
  }
  return cols;
}

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

struct Solution {
  std::vector<double> beta;
  std::vector<double> residual;
  double lambda = 0.0;

  double l1() const {
    double s = 0.0;
    for (double b : beta) s += std::abs(b);
    return s;
  }
};

// One coordinate pass over `which`; returns the largest coefficient change.
template <typename Indices>
double sweep(const Columns& cols, double lambda, Solution& sol, const Indices& which,
             double inv_n) {
  double max_change = 0.0;
  for (std::size_t j : which) {
    if (cols.scale[j] == 0.0) continue;
    double rho = 0.0;
    for (std::uint32_t i : cols.ones[j]) rho += sol.residual[i];
    rho = rho * inv_n + cols.scale[j] * sol.beta[j];
    const double updated = soft_threshold(rho, lambda) / cols.scale[j];
    const double delta = updated - sol.beta[j];
    if (delta != 0.0) {
      for (std::uint32_t i : cols.ones[j]) sol.residual[i] -= delta;
      sol.beta[j] = updated;
      max_change = std::max(max_change, std::abs(delta));
    }
  }
  return max_change;
}

void coordinate_descent(const Columns& cols, double lambda, Solution& sol,
                        double tolerance, int max_sweeps) {
  const double inv_n = 1.0 / static_cast<double>(sol.residual.size());
  std::vector<std::size_t> all(cols.ones.size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  sol.lambda = lambda;

  int sweeps = 0;
  while (sweeps < max_sweeps) {
    ++sweeps;
    if (sweep(cols, lambda, sol, all, inv_n) < tolerance) break;
    std::vector<std::size_t> active;
    for (std::size_t j = 0; j < sol.beta.size(); ++j) {
      if (sol.beta[j] != 0.0) active.push_back(j);
    }
    while (sweeps < max_sweeps) {
      ++sweeps;
      if (sweep(cols, lambda, sol, active, inv_n) < tolerance) break;
    }
  }
}

BlipModel to_model(const Solution& sol, const std::vector<BasisFunction>& basis,
                   double l1_bound, std::size_t dim) {
  BlipModel model;
  model.l1_bound = l1_bound;
  model.penalty = sol.lambda;
  model.dim = dim;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j].subset.empty()) {
      model.intercept += sol.beta[j];
    } else if (sol.beta[j] != 0.0) {
      model.basis.push_back(basis[j]);
      model.coefficients.push_back(sol.beta[j]);
    }
  }
  return model;
}

std::size_t check_rows(std::span<const BlipRow> rows) {
  if (rows.empty()) throw std::invalid_argument("lasso: no rows");
  const std::size_t d = rows.front().context.size();
  for (const auto& row : rows) {
    if (row.context.size() != d) {
      throw SpecificationError("lasso: context dimension varies across rows");
    }
    if (!std::isfinite(row.pseudo_outcome)) {
      throw std::invalid_argument("lasso: non-finite pseudo-outcome");
    }
  }
  return d;
}

}  // namespace

bool BasisFunction::operator()(std::span<const double> context) const {
  for (std::size_t k = 0; k < subset.size(); ++k) {
    if (!(context[subset[k]] >= knot[k])) return false;
  }
  return true;
}

double BlipModel::predict(std::span<const double> context) const {
  if (context.size() != dim) {
    throw SpecificationError("blip model expects " + std::to_string(dim) +
                             " features, got " + std::to_string(context.size()));
  }
  double value = intercept;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j](context)) value += coefficients[j];
  }
  return value;
}

double BlipModel::l1_norm() const {
  double s = std::abs(intercept);
  for (double b : coefficients) s += std::abs(b);
  return s;
}

std::vector<BasisFunction> indicator_basis(std::span<const BlipRow> rows) {
  const std::size_t d = check_rows(rows);
  if (d > kMaxContextDim) {
    throw SpecificationError("lasso: context dimension too large for the "
                             "indicator basis");
  }
  std::vector<BasisFunction> basis{BasisFunction{}};
  for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
    std::vector<std::size_t> subset;
    for (std::size_t j = 0; j < d; ++j) {
      if (mask & (1u << j)) subset.push_back(j);
    }
    std::set<std::vector<double>> seen;
    for (const auto& row : rows) {
      std::vector<double> knot;
      knot.reserve(subset.size());
      for (std::size_t j : subset) knot.push_back(row.context[j]);
      if (seen.insert(knot).second) basis.push_back({subset, std::move(knot)});
    }
  }
  return basis;
}

BlipModel fit_blip_lasso(std::span<const BlipRow> rows, double l1_bound,
                         const LassoOptions& options) {
  if (std::isnan(l1_bound) || l1_bound < 0.0) {
    throw std::invalid_argument("lasso: L1 bound must be >= 0");
  }
  return fit_blip_lasso_on_basis(rows, indicator_basis(rows), l1_bound, options);
}

BlipModel fit_blip_lasso_on_basis(std::span<const BlipRow> rows,
                                  const std::vector<BasisFunction>& basis,
                                  double l1_bound, const LassoOptions& options) {
  if (std::isnan(l1_bound) || l1_bound < 0.0) {
    throw std::invalid_argument("lasso: L1 bound must be >= 0");
  }
  const std::size_t d = check_rows(rows);
  if (basis.empty() || !basis.front().subset.empty()) {
    throw std::invalid_argument("lasso: basis must start with the intercept");
  }
  const Columns cols = build_columns(rows, basis);
  const std::size_t n = rows.size();

  std::vector<double> y(n);
  double y_scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = rows[i].pseudo_outcome;
    y_scale = std::max(y_scale, std::abs(y[i]));
  }
  const double tol = options.cd_tolerance * y_scale;

  Solution zero{std::vector<double>(basis.size(), 0.0), y, 0.0};

  double lambda_max = 0.0;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    double s = 0.0;
    for (std::uint32_t i : cols.ones[j]) s += y[i];
    lambda_max = std::max(lambda_max, std::abs(s) / static_cast<double>(n));
  }

  if (l1_bound == 0.0) {
    zero.lambda = lambda_max;
    return to_model(zero, basis, l1_bound, d);
  }

  Solution free = zero;
  coordinate_descent(cols, 0.0, free, tol, options.max_sweeps);
  if (free.l1() <= l1_bound) return to_model(free, basis, l1_bound, d);

  double lo = 0.0;
  double hi = lambda_max;
  Solution best = zero;
  best.lambda = lambda_max;
  Solution warm = free;
  for (int it = 0; it < options.max_bisections; ++it) {
    if (l1_bound - best.l1() <= options.budget_tolerance) break;
    if (hi - lo <= 1e-15 * hi) break;
    const double mid = 0.5 * (lo + hi);
    coordinate_descent(cols, mid, warm, tol, options.max_sweeps);
    if (warm.l1() > l1_bound) {
      lo = mid;
    } else {
      hi = mid;
      best = warm;
    }
  }
  return to_model(best, basis, l1_bound, d);
}

BlipCI::BlipCI(std::vector<BlipModel> replicates, double level)
    : replicates_(std::move(replicates)), level_(level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("BlipCI: level must lie in (0, 1)");
  }
}

std::vector<double> BlipCI::evaluations(std::span<const double> context) const {
  std::vector<double> out;
  out.reserve(replicates_.size());
  for (const auto& model : replicates_) out.push_back(model.predict(context));
  return out;
}

double BlipCI::half_width(std::span<const double> context) const {
  if (replicates_.empty()) return 0.0;
  const auto values = evaluations(context);
  const double lo = sample_quantile(values, 0.5 * (1.0 - level_));
  const double hi = sample_quantile(values, 0.5 * (1.0 + level_));
  return std::max(0.0, 0.5 * (hi - lo));
}

BlipCI bootstrap_blip_ci(const BlipModel& fit, std::span<const BlipRow> rows,
                         std::size_t n_boot, double level, Rng& rng,
                         const LassoOptions& options) {
  if (n_boot < 2) throw std::invalid_argument("bootstrap: n_boot must be >= 2");
  check_rows(rows);
  std::vector<BasisFunction> selected{BasisFunction{}};
  selected.insert(selected.end(), fit.basis.begin(), fit.basis.end());

  std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
  std::vector<BlipModel> replicates;
  replicates.reserve(n_boot);
  std::vector<BlipRow> sample(rows.size());
  for (std::size_t b = 0; b < n_boot; ++b) {
    for (auto& row : sample) row = rows[pick(rng)];
    replicates.push_back(
        fit_blip_lasso_on_basis(sample, selected, fit.l1_bound, options));
  }
  return BlipCI(std::move(replicates), level);
}

double sample_quantile(std::vector<double> values, double prob) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace nof1
