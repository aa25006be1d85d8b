#include "nof1/logistic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>

#include "nof1/dgp.hpp"

namespace nof1 {

namespace {

// log(1 + exp(eta)) without overflow.
double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd w;  // normalized to sum 1
};

double objective(const Problem& p, const Eigen::VectorXd& beta, double ridge) {
  const Eigen::VectorXd eta = p.x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += p.w[i] * (p.y[i] * eta[i] - softplus(eta[i]));
  }
  return ll - 0.5 * ridge * beta.squaredNorm();
}

struct NewtonResult {
  Eigen::VectorXd beta;
  bool converged = false;
  int iterations = 0;
};

std::optional<NewtonResult> newton(const Problem& p, double ridge,
                                   const LogisticOptions& opt) {
  const Eigen::Index k = p.x.cols();
  NewtonResult res;
  res.beta = Eigen::VectorXd::Zero(k);
  double current = objective(p, res.beta, ridge);

  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    res.iterations = iter;
    const Eigen::VectorXd eta = p.x * res.beta;
    Eigen::VectorXd mu(eta.size());
    Eigen::VectorXd v(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      mu[i] = expit(eta[i]);
      v[i] = p.w[i] * mu[i] * (1.0 - mu[i]);
    }
    const Eigen::VectorXd grad =
        p.x.transpose() * (p.w.cwiseProduct(p.y - mu)) - ridge * res.beta;
    Eigen::MatrixXd info = p.x.transpose() * v.asDiagonal() * p.x;
    info.diagonal().array() += ridge;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
    Eigen::VectorXd delta = ldlt.solve(grad);
    if (!delta.allFinite()) return std::nullopt;

    // Step halving keeps the objective non-decreasing.
    double step = 1.0;
    Eigen::VectorXd next = res.beta + delta;
    double value = objective(p, next, ridge);
    int halvings = 0;
    while (!(value >= current - 1e-15 * std::abs(current)) && halvings < 40) {
      step *= 0.5;
      next = res.beta + step * delta;
      value = objective(p, next, ridge);
      ++halvings;
    }
    if (!std::isfinite(value) || halvings == 40) return std::nullopt;

    const double change = (step * delta).cwiseAbs().maxCoeff();
    res.beta = next;
    current = value;
    if (change < opt.tolerance) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace

FeatureLayout FeatureLayout::intercept_only(std::size_t n_features) {
  return {{{TermRole::kIntercept, 0}}, n_features};
}

FeatureLayout FeatureLayout::main_terms(std::size_t n_features) {
  FeatureLayout layout{{{TermRole::kIntercept, 0}, {TermRole::kTreatment, 0}},
                       n_features};
  for (std::size_t j = 0; j < n_features; ++j) {
    layout.terms.push_back({TermRole::kFeature, j});
  }
  return layout;
}

FeatureLayout FeatureLayout::with_interactions(std::size_t n_features) {
  FeatureLayout layout = main_terms(n_features);
  for (std::size_t j = 0; j < n_features; ++j) {
    layout.terms.push_back({TermRole::kTreatmentFeature, j});
  }
  return layout;
}

double FeatureLayout::value(std::size_t term, std::span<const double> features,
                            int a) const {
  const LayoutTerm& t = terms[term];
  switch (t.role) {
    case TermRole::kIntercept:
      return 1.0;
    case TermRole::kTreatment:
      return static_cast<double>(a);
    case TermRole::kFeature:
      return features[t.feature];
    case TermRole::kTreatmentFeature:
      return a * features[t.feature];
  }
  return 0.0;
}

double WorkingModel::linear_predictor(std::span<const double> features, int a) const {
  if (features.size() != layout.n_features) {
    throw SpecificationError("working model expects " +
                             std::to_string(layout.n_features) + " features, got " +
                             std::to_string(features.size()));
  }
  double eta = 0.0;
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    eta += coefficients[k] * layout.value(k, features, a);
  }
  return eta;
}

WorkingModel fit_logistic(std::span<const DesignRow> rows, const FeatureLayout& layout,
                          std::span<const double> weights,
                          const LogisticOptions& options) {
  if (rows.empty()) throw std::invalid_argument("fit_logistic: no rows");
  if (!weights.empty() && weights.size() != rows.size()) {
    throw std::invalid_argument("fit_logistic: weight count mismatch");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto k = static_cast<Eigen::Index>(layout.size());

  Problem p{Eigen::MatrixXd(n, k), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const DesignRow& row = rows[static_cast<std::size_t>(i)];
    if (row.features.size() != layout.n_features) {
      throw SpecificationError("design row dimension mismatch");
    }
    if (!(row.y >= 0.0 && row.y <= 1.0)) {
      throw std::invalid_argument("fit_logistic: outcome outside [0, 1]");
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      p.x(i, j) = layout.value(static_cast<std::size_t>(j), row.features, row.a);
    }
    p.y[i] = row.y;
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
    if (!(w >= 0.0)) throw std::invalid_argument("fit_logistic: negative weight");
    p.w[i] = w;
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("fit_logistic: zero total weight");
  p.w /= total;

  WorkingModel model;
  model.layout = layout;
  auto plain = newton(p, 0.0, options);
  if (plain && plain->converged) {
    model.coefficients.assign(plain->beta.data(), plain->beta.data() + k);
    model.converged = true;
    model.iterations = plain->iterations;
    return model;
  }

  auto ridge = newton(p, options.ridge_penalty, options);
  model.ridge_fallback = true;
  if (!ridge) {
    throw Error("fit_logistic: ridge-penalized fit failed");
  }
  model.coefficients.assign(ridge->beta.data(), ridge->beta.data() + k);
  model.converged = ridge->converged;
  model.iterations = ridge->iterations;
  return model;
}

double predict_qbar(const WorkingModel& model, const ContextSummary& context, int a,
                    const Bounds& q_bounds) {
  return q_bounds.clamp(expit(model.linear_predictor(context.features, a)));
}

double blip_of(const WorkingModel& model, const ContextSummary& context,
               const Bounds& q_bounds) {
  return predict_qbar(model, context, 1, q_bounds) -
         predict_qbar(model, context, 0, q_bounds);
}

}  // namespace nof1
