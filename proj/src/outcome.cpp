#include "nof1/outcome.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "nof1/dgp.hpp"

namespace nof1 {

namespace {

FeatureLayout layout_for(CandidateKind kind, std::size_t dim) {
  switch (kind) {
    case CandidateKind::kInterceptOnly:
      return FeatureLayout::intercept_only(dim);
    case CandidateKind::kGlmMain:
    case CandidateKind::kLassoBlip:
      return FeatureLayout::main_terms(dim);
    case CandidateKind::kGlmInteract:
      return FeatureLayout::with_interactions(dim);
  }
  return FeatureLayout::main_terms(dim);
}

std::vector<DesignRow> design_rows(std::span<const TrainingRow> rows) {
  std::vector<DesignRow> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r.context.features, r.a, r.y});
  return out;
}

}  // namespace

double FittedOutcome::qbar(const ContextSummary& context, int a) const {
  if (!blip_model) return predict_qbar(glm, context, a, q_bounds);
  const double control = predict_qbar(glm, context, 0, q_bounds);
  if (a == 0) return control;
  return q_bounds.clamp(control + blip_model->predict(context.features));
}

double FittedOutcome::blip(const ContextSummary& context) const {
  if (blip_model) return blip_model->predict(context.features);
  return blip_of(glm, context, q_bounds);
}

FittedOutcome fit_candidate(const CandidateSpec& candidate,
                            std::span<const TrainingRow> rows,
                            const FitSettings& settings, Rng* rng) {
  if (rows.empty()) throw std::invalid_argument("fit_candidate: no rows");
  const std::size_t dim = rows.front().context.dim();
  FittedOutcome out;
  out.candidate = candidate;
  out.q_bounds = settings.q_bounds;
  const auto design = design_rows(rows);
  out.glm = fit_logistic(design, layout_for(candidate.kind, dim), {},
                         settings.logistic);
  if (candidate.kind != CandidateKind::kLassoBlip) return out;

  std::vector<BlipRow> blip_rows;
  blip_rows.reserve(rows.size());
  for (const auto& r : rows) {
    const double q1 = predict_qbar(out.glm, r.context, 1, settings.q_bounds);
    const double q0 = predict_qbar(out.glm, r.context, 0, settings.q_bounds);
    blip_rows.push_back({r.context.features,
                         d1_pseudo_outcome(r.y, r.a, q1, q0, r.g1, settings.g_floor)});
  }
  out.blip_model = fit_blip_lasso(blip_rows, candidate.l1_bound, settings.lasso);
  if (settings.bootstrap_ci) {
    if (rng == nullptr) throw StateError("bootstrap requested without a random stream");
    out.blip_ci = bootstrap_blip_ci(*out.blip_model, blip_rows, settings.n_boot,
                                    settings.ci_level, *rng, settings.lasso);
  }
  return out;
}

double quasi_nll(double y, double q) {
  return -(y * std::log(q) + (1.0 - y) * std::log1p(-q));
}

SelectionResult select_recursive_origin(std::span<const CandidateSpec> candidates,
                                        std::span<const TrainingRow> rows,
                                        std::size_t val_size,
                                        const FitSettings& settings, Rng* rng) {
  if (candidates.empty()) throw std::invalid_argument("selector: no candidates");
  if (val_size < 1 || rows.size() < 2 * val_size) {
    throw std::invalid_argument("selector: need at least 2*val_size rows");
  }
  const std::size_t n_train = rows.size() - val_size;
  const auto train = rows.first(n_train);
  const auto valid = rows.subspan(n_train);

  SelectionResult result;
  result.validation_loss.assign(candidates.size(),
                                std::numeric_limits<double>::infinity());
  result.failures.assign(candidates.size(), "");
  FitSettings cv_settings = settings;
  cv_settings.bootstrap_ci = false;

  bool any = false;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    try {
      const FittedOutcome fit = fit_candidate(candidates[k], train, cv_settings);
      double loss = 0.0;
      for (const auto& r : valid) loss += quasi_nll(r.y, fit.qbar(r.context, r.a));
      loss /= static_cast<double>(valid.size());
      if (!std::isfinite(loss)) throw Error("non-finite validation loss");
      result.validation_loss[k] = loss;
      if (!any || loss < result.validation_loss[result.best]) result.best = k;
      any = true;
    } catch (const std::exception& e) {
      result.failures[k] = e.what();
    }
  }
  if (!any) {
    std::ostringstream msg;
    msg << "all candidates failed:";
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      msg << " [" << candidates[k].name() << ": " << result.failures[k] << "]";
    }
    throw SelectionError(msg.str());
  }
  result.model = fit_candidate(candidates[result.best], rows, settings, rng);
  return result;
}

double d1_pseudo_outcome(double y, int a, double qbar1, double qbar0, double g1,
                         double g_floor) {
  if (!(g1 >= g_floor && g1 <= 1.0 - g_floor)) {
    throw PositivityError("assignment probability " + std::to_string(g1) +
                          " outside [g_floor, 1 - g_floor]");
  }
  const double g_a = a == 1 ? g1 : 1.0 - g1;
  const double q_a = a == 1 ? qbar1 : qbar0;
  return (2.0 * a - 1.0) / g_a * (y - q_a) + (qbar1 - qbar0);
}

}  // namespace nof1
