#include "nof1/tmle.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <stdexcept>

#include "nof1/dgp.hpp"

namespace nof1 {

namespace {

void check_floor(double g, double g_floor) {
  if (!(g >= g_floor)) {
    throw PositivityError("treatment probability " + std::to_string(g) +
                          " below floor " + std::to_string(g_floor));
  }
}

struct Score {
  double value = 0.0;  // sum h (y - q_eps)
  double info = 0.0;   // sum h^2 q_eps (1 - q_eps)
};

Score score_at(std::span<const FluctuationRow> rows, std::span<const double> offsets,
               double eps) {
  Score s;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].h == 0.0) continue;
    const double q = expit(offsets[i] + eps * rows[i].h);
    s.value += rows[i].h * (rows[i].y - q);
    s.info += rows[i].h * rows[i].h * q * (1.0 - q);
  }
  return s;
}

}  // namespace

double clever_covariate(int a, int d, double g_of_a, double g_floor) {
  check_floor(g_of_a, g_floor);
  return a == d ? 1.0 / g_of_a : 0.0;
}

EpsilonFit solve_epsilon(std::span<const FluctuationRow> rows, double bound,
                         double score_tolerance) {
  EpsilonFit fit;
  bool any = false;
  std::vector<double> offsets(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!(rows[i].q > 0.0 && rows[i].q < 1.0)) {
      throw std::invalid_argument("solve_epsilon: initial prediction outside (0, 1)");
    }
    offsets[i] = logit(rows[i].q);
    any = any || rows[i].h != 0.0;
  }
  if (!any) {
    fit.degenerate = true;
    return fit;
  }
  const double n = static_cast<double>(rows.size());
  const double tol = score_tolerance * n;

  Score s = score_at(rows, offsets, 0.0);
  if (std::abs(s.value) <= tol) return fit;

  // The score is non-increasing in eps.
  double lo = -bound;
  double hi = bound;
  if (s.value > 0.0) {
    if (score_at(rows, offsets, bound).value > 0.0) {
      fit.epsilon = bound;
      fit.clamped = true;
      return fit;
    }
    lo = 0.0;
  } else {
    if (score_at(rows, offsets, -bound).value < 0.0) {
      fit.epsilon = -bound;
      fit.clamped = true;
      return fit;
    }
    hi = 0.0;
  }

  double eps = 0.0;
  for (int iter = 1; iter <= 200; ++iter) {
    fit.iterations = iter;
    double next = s.info > 0.0 ? eps + s.value / s.info : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    eps = next;
    s = score_at(rows, offsets, eps);
    if (std::abs(s.value) <= tol) break;
    if (s.value > 0.0) {
      lo = eps;
    } else {
      hi = eps;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(eps))) break;
  }
  fit.epsilon = eps;
  return fit;
}

double fluctuate(double q_init, double h, double epsilon) {
  if (h == 0.0 || epsilon == 0.0) return q_init;
  return expit(logit(q_init) + epsilon * h);
}

double eic_value(double y, double q_star_at_a, int a, int d, double g_of_a,
                 double g_floor) {
  return clever_covariate(a, d, g_of_a, g_floor) * (y - q_star_at_a);
}

EstimateReport tmle_estimate(std::span<const TmleRow> rows, const TmleOptions& options) {
  if (rows.empty()) throw std::invalid_argument("tmle_estimate: empty input");
  const std::size_t n = rows.size();

  std::vector<FluctuationRow> fl(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TmleRow& r = rows[i];
    if (!(r.g1 >= options.g_floor && r.g1 <= 1.0 - options.g_floor)) {
      throw PositivityError("row " + std::to_string(i + 1) +
                            ": assignment probability " + std::to_string(r.g1) +
                            " outside [g_floor, 1 - g_floor]");
    }
    if (!(r.q_a > 0.0 && r.q_a < 1.0 && r.q_d > 0.0 && r.q_d < 1.0)) {
      throw std::invalid_argument("tmle_estimate: prediction outside (0, 1) at row " +
                                  std::to_string(i + 1));
    }
    fl[i] = {r.y, r.q_a, clever_covariate(r.a, r.d, r.g_of(r.a), options.g_floor)};
  }

  const EpsilonFit eps =
      solve_epsilon(fl, options.epsilon_bound, options.score_tolerance);

  EstimateReport rep;
  rep.n = n;
  rep.epsilon = eps.epsilon;
  rep.epsilon_clamped = eps.clamped;
  rep.epsilon_degenerate = eps.degenerate;
  rep.q_star_d.resize(n);

  double psi = 0.0;
  double score = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const TmleRow& r = rows[i];
    const double q_star_a = fluctuate(r.q_a, fl[i].h, eps.epsilon);
    rep.q_star_d[i] = fluctuate(r.q_d, 1.0 / r.g_of(r.d), eps.epsilon);
    psi += rep.q_star_d[i];
    const double dstar = fl[i].h * (r.y - q_star_a);
    score += dstar;
    sq += dstar * dstar;
  }
  const double nd = static_cast<double>(n);
  rep.psi_hat = psi / nd;
  rep.score_residual = score / nd;
  rep.sigma2_hat = sq / nd;
  const double half = normal_quantile(1.0 - 0.5 * options.alpha) *
                      std::sqrt(rep.sigma2_hat / nd);
  rep.ci_lower = rep.psi_hat - half;
  rep.ci_upper = rep.psi_hat + half;

  std::vector<std::size_t> grid;
  for (std::size_t m = 100; m < n; m += 100) grid.push_back(m);
  grid.push_back(n);
  rep.cond_var_path = cond_var_path(rows, rep.q_star_d, grid);
  return rep;
}

std::vector<std::pair<std::size_t, double>> cond_var_path(
    std::span<const TmleRow> rows, std::span<const double> q_star_d,
    std::span<const std::size_t> grid) {
  if (q_star_d.size() != rows.size()) {
    throw std::invalid_argument("cond_var_path: prediction count mismatch");
  }
  std::vector<std::pair<std::size_t, double>> out;
  out.reserve(grid.size());
  double running = 0.0;
  std::size_t done = 0;
  for (std::size_t n : grid) {
    if (n < 1 || n > rows.size() || n < done) {
      throw std::invalid_argument("cond_var_path: grid must be ascending within 1..N");
    }
    for (; done < n; ++done) {
      const double q = q_star_d[done];
      running += q * (1.0 - q) / rows[done].g_of(rows[done].d);
    }
    out.emplace_back(n, running / static_cast<double>(n));
  }
  return out;
}

double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace nof1
