#include "nof1/config.hpp"

#include <cmath>

namespace nof1 {

namespace {

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

void check_schedule(const Schedule& s, const std::string& field, double low,
                    bool low_inclusive, double high) {
  require(!s.steps().empty(), field, "schedule is empty");
  require(s.non_increasing(), field, "schedule must be non-increasing in t");
  for (const auto& [start, value] : s.steps()) {
    const bool above = low_inclusive ? value >= low : value > low;
    require(std::isfinite(value) && above && value <= high, field,
            "value " + std::to_string(value) + " out of range");
  }
}

}  // namespace

void TrialConfig::validate() const {
  try {
    dgp.validate();
  } catch (const SpecificationError& e) {
    throw ConfigError("dgp", e.what());
  }
  try {
    context.validate(dgp.w_dim());
  } catch (const SpecificationError& e) {
    throw ConfigError("context", e.what());
  }
  require(static_cast<std::size_t>(context.max_lag()) <= kBurnInLength, "context",
          "lags beyond the burn-in length are unsupported");

  require(g_floor > 0.0 && g_floor <= 0.5, "g_floor", "must lie in (0, 1/2]");
  check_schedule(c_schedule, "policy.c", g_floor, true, 0.5);
  check_schedule(e_schedule, "policy.e", 0.0, false, 1.0);
  require(q_bounds.low > 0.0 && q_bounds.low < q_bounds.high && q_bounds.high < 1.0,
          "q_bounds", "need 0 < low < high < 1");
  require(alpha > 0.0 && alpha < 1.0, "alpha", "must lie in (0, 1)");

  require(checkpoint_step >= 1, "checkpoint_step", "must be >= 1");
  require(initial_n <= max_n, "max_n", "must be >= initial_n");
  require((max_n - initial_n) % checkpoint_step == 0, "checkpoint_step",
          "must divide max_n - initial_n");

  require(!estimator.candidates.empty(), "estimator.candidates", "no candidates");
  for (const auto& c : estimator.candidates) {
    if (c.kind == CandidateKind::kLassoBlip) {
      require(!std::isnan(c.l1_bound) && c.l1_bound >= 0.0, "estimator.candidates",
              "lasso_blip bound M must be >= 0");
    }
  }
  require(estimator.val_size >= 1, "estimator.val_size", "must be >= 1");
  require(initial_n >= kBurnInLength + 2 * estimator.val_size, "initial_n",
          "balanced phase too short for the validation split");
  require(estimator.ci_level > 0.0 && estimator.ci_level < 1.0,
          "estimator.ci_level", "must lie in (0, 1)");
  if (policy_mode == PolicyMode::kHalCi) {
    for (const auto& c : estimator.candidates) {
      require(c.kind == CandidateKind::kLassoBlip, "policy.mode",
              "hal_ci requires lasso_blip candidates only");
    }
    require(estimator.n_boot >= 2, "estimator.n_boot", "must be >= 2");
  }
}

std::vector<std::size_t> TrialConfig::checkpoints() const {
  std::vector<std::size_t> out;
  for (std::size_t n = initial_n; n <= max_n; n += checkpoint_step) out.push_back(n);
  return out;
}

FitSettings TrialConfig::fit_settings() const {
  FitSettings s;
  s.q_bounds = q_bounds;
  s.g_floor = g_floor;
  s.bootstrap_ci = policy_mode == PolicyMode::kHalCi;
  s.n_boot = estimator.n_boot;
  s.ci_level = estimator.ci_level;
  return s;
}

TmleOptions TrialConfig::tmle_options() const {
  TmleOptions o;
  o.alpha = alpha;
  o.g_floor = g_floor;
  o.q_bounds = q_bounds;
  return o;
}

TrialConfig preset_config(const std::string& name, std::size_t initial_n) {
  TrialConfig cfg;
  cfg.dgp_id = name;
  cfg.dgp = dgp_preset(name);
  if (name == "sim1a") {
    cfg.context.lag_map = {{Variable::A(), {1}},
                           {Variable::Y(), {1}},
                           {Variable::W(0), {1}},
                           {Variable::W(1), {1}}};
  } else {
    cfg.context.lag_map = {{Variable::A(), {1}},
                           {Variable::Y(), {1, 3}},
                           {Variable::W(0), {1, 4}},
                           {Variable::W(1), {1, 2}}};
  }
  cfg.initial_n = initial_n;
  cfg.checkpoint_step = 200;
  cfg.max_n = initial_n + 800;
  cfg.estimator.candidates = {{CandidateKind::kGlmMain, 0.0},
                              {CandidateKind::kGlmInteract, 0.0}};
  cfg.estimator.val_size = 30;
  return cfg;
}

}  // namespace nof1
