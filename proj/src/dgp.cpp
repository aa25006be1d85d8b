#include "nof1/dgp.hpp"

#include <algorithm>
#include <cmath>

namespace nof1 {

namespace {

double term_value(const LinearTerm& term, const TrialHistory& history,
                  std::size_t t) {
  if (term.lag < 1 || static_cast<std::size_t>(term.lag) >= t) {
    throw MissingHistoryError(term.var.name() + " lag " +
                              std::to_string(term.lag) + " unavailable at t=" +
                              std::to_string(t));
  }
  return term.coef * term.var.value_in(history.at(t - term.lag));
}

void check_terms(const std::vector<LinearTerm>& terms, std::size_t w_dim,
                 const std::string& where) {
  for (const auto& term : terms) {
    if (term.lag < 1) {
      throw SpecificationError(where + ": lag of " + term.var.name() +
                               " must be >= 1");
    }
    if (term.var.kind == Variable::Kind::kW && term.var.w_index >= w_dim) {
      throw SpecificationError(where + ": unknown covariate " + term.var.name());
    }
  }
}

Marginal bern(double p) { return {Marginal::Kind::kBernoulli, p, 0.0}; }
Marginal std_normal() { return {Marginal::Kind::kNormal, 0.0, 1.0}; }

LinearTerm term(Variable v, int lag, double coef) { return {v, lag, coef}; }

}  // namespace

double Marginal::draw(Rng& rng) const {
  if (kind == Kind::kBernoulli) return uniform01(rng) < location ? 1.0 : 0.0;
  std::normal_distribution<double> normal(location, scale);
  return normal(rng);
}

int DgpSpec::max_lag() const {
  int m = 0;
  for (const auto& t : y.terms) m = std::max(m, t.lag);
  for (const auto& eq : w) {
    for (const auto& t : eq.terms) m = std::max(m, t.lag);
  }
  return m;
}

void DgpSpec::validate() const {
  check_terms(y.terms, w_dim(), "y_equation");
  for (std::size_t k = 0; k < w.size(); ++k) {
    check_terms(w[k].terms, w_dim(), "w_equations[" + std::to_string(k) + "]");
  }
  if (burn_in.w.size() != w.size()) {
    throw SpecificationError("burn_in_law has " + std::to_string(burn_in.w.size()) +
                             " covariate marginals for " +
                             std::to_string(w.size()) + " covariates");
  }
  if (!(noise_sd > 0.0)) throw SpecificationError("noise_sd must be positive");
  if (static_cast<std::size_t>(max_lag()) > kBurnInLength) {
    throw SpecificationError("lags beyond the burn-in length are unsupported");
  }
}

ContextSpec DgpSpec::oracle_context() const {
  ContextSpec spec;
  for (const auto& t : y.terms) spec.lag_map.push_back({t.var, {t.lag}});
  return spec;
}

DgpSpec sim1a_dgp() {
  DgpSpec spec;
  spec.name = "sim1a";
  spec.burn_in = {bern(0.5), bern(0.5), {bern(0.5), std_normal()}};
  spec.y = {0.0, 1.5, {term(Variable::Y(), 1, 0.5), term(Variable::W(0), 1, -1.1)}};
  spec.w = {
      {WEquation::Family::kLogistic, 0.0,
       {term(Variable::W(0), 1, 0.5), term(Variable::Y(), 1, -0.5),
        term(Variable::W(1), 1, 0.1)}},
      {WEquation::Family::kGaussian, 0.0,
       {term(Variable::A(), 1, 0.6), term(Variable::Y(), 1, 1.0),
        term(Variable::W(0), 1, -1.0)}},
  };
  spec.noise_sd = 1.0;
  return spec;
}

DgpSpec sim1b_dgp() {
  DgpSpec spec;
  spec.name = "sim1b";
  spec.burn_in = {bern(0.5), bern(0.5), {bern(0.5), std_normal()}};
  spec.y = {0.0, 1.5, {term(Variable::Y(), 3, 0.5), term(Variable::W(0), 4, -1.1)}};
  spec.w = {
      {WEquation::Family::kLogistic, 0.0,
       {term(Variable::W(0), 1, 0.5), term(Variable::Y(), 1, -0.5),
        term(Variable::W(1), 2, 0.1)}},
      {WEquation::Family::kGaussian, 0.0,
       {term(Variable::A(), 1, 0.6), term(Variable::Y(), 1, 1.0),
        term(Variable::W(0), 2, -1.0)}},
  };
  spec.noise_sd = 1.0;
  return spec;
}

DgpSpec dgp_preset(const std::string& name) {
  if (name == "sim1a") return sim1a_dgp();
  if (name == "sim1b") return sim1b_dgp();
  throw ConfigError("dgp_id", "unknown DGP '" + name + "'");
}

double expit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

std::vector<Block> simulate_burn_in(const DgpSpec& spec, Rng& rng) {
  std::vector<Block> out;
  out.reserve(kBurnInLength);
  for (std::size_t i = 0; i < kBurnInLength; ++i) {
    Block b;
    b.a = spec.burn_in.a.draw(rng) != 0.0 ? 1 : 0;
    b.y = spec.burn_in.y.draw(rng);
    b.w.reserve(spec.burn_in.w.size());
    for (const auto& m : spec.burn_in.w) b.w.push_back(m.draw(rng));
    out.push_back(std::move(b));
  }
  return out;
}

Block step(const DgpSpec& spec, const TrialHistory& history, int a, Rng& rng) {
  const std::size_t t = history.size() + 1;
  Block b;
  b.a = a;

  double eta = spec.y.intercept + spec.y.coef_a * a;
  for (const auto& term : spec.y.terms) eta += term_value(term, history, t);
  b.y = uniform01(rng) < expit(eta) ? 1.0 : 0.0;

  b.w.reserve(spec.w.size());
  for (const auto& eq : spec.w) {
    double lp = eq.intercept;
    for (const auto& term : eq.terms) lp += term_value(term, history, t);
    if (eq.family == WEquation::Family::kLogistic) {
      b.w.push_back(uniform01(rng) < expit(lp) ? 1.0 : 0.0);
    } else {
      std::normal_distribution<double> noise(0.0, spec.noise_sd);
      b.w.push_back(lp + noise(rng));
    }
  }
  return b;
}

double true_conditional_mean(const DgpSpec& spec, const ContextSummary& context,
                             int a) {
  if (context.dim() != spec.y.terms.size()) {
    throw SpecificationError("oracle context has " +
                             std::to_string(context.dim()) + " features, outcome "
                             "equation expects " +
                             std::to_string(spec.y.terms.size()));
  }
  double eta = spec.y.intercept + spec.y.coef_a * a;
  for (std::size_t i = 0; i < spec.y.terms.size(); ++i) {
    eta += spec.y.terms[i].coef * context.features[i];
  }
  return expit(eta);
}

double true_blip(const DgpSpec& spec, const ContextSummary& context) {
  return true_conditional_mean(spec, context, 1) -
         true_conditional_mean(spec, context, 0);
}

}  // namespace nof1
