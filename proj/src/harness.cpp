#include "nof1/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>

#include "nof1/policy.hpp"

namespace nof1 {

namespace {

class TrialRunner {
 public:
  TrialRunner(const TrialConfig& config, std::uint64_t seed)
      : config_(config),
        settings_(config.fit_settings()),
        oracle_spec_(config.dgp.oracle_context()),
        rng_(seed) {
    result_.seed = seed;
  }

  TrialResult run() {
    result_.history = TrialHistory(simulate_burn_in(config_.dgp, rng_), kBurnInLength);
    result_.steps.assign(kBurnInLength, StepRecord{});

    for (std::size_t t = kFirst; t <= config_.initial_n; ++t) {
      open_step(t);
      StepRecord rec;
      rec.g1 = 0.5;
      commit_step(draw_action(rec.g1, rng_), rec);
    }

    const auto checkpoints = config_.checkpoints();
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
      const std::size_t n = checkpoints[k];
      refit(n);
      if (k == 0) backfill_rules(n);
      evaluate(n);
      if (n == config_.max_n) break;
      for (std::size_t t = n + 1; t <= n + config_.checkpoint_step; ++t) {
        const std::size_t every = config_.estimator.refit_every;
        if (every > 0 && t - 1 > n && (t - 1 - config_.initial_n) % every == 0) {
          refit(t - 1);
        }
        adaptive_step(t);
      }
    }
    return std::move(result_);
  }

 private:
  static constexpr std::size_t kFirst = kBurnInLength + 1;

  // Contexts for time t, computed before A(t) is assigned.
  void open_step(std::size_t t) {
    const double previous_blip = result_.steps[t - 2].assign_blip;
    est_ctx_.push_back(
        extract_context(result_.history, t, config_.context, previous_blip));
    oracle_ctx_.push_back(extract_context(result_.history, t, oracle_spec_));
  }

  void commit_step(int a, const StepRecord& rec) {
    result_.history.append(step(config_.dgp, result_.history, a, rng_));
    result_.steps.push_back(rec);
  }

  const ContextSummary& context(std::size_t t) const { return est_ctx_[t - kFirst]; }

  void refit(std::size_t n) {
    std::vector<TrainingRow> rows;
    rows.reserve(n - kBurnInLength);
    for (std::size_t t = kFirst; t <= n; ++t) {
      const Block& b = result_.history.at(t);
      rows.push_back({context(t), b.a, b.y, result_.steps[t - 1].g1});
    }
    auto selection = select_recursive_origin(config_.estimator.candidates, rows,
                                             config_.estimator.val_size, settings_,
                                             &rng_);
    selected_ = selection.model.candidate.name();
    model_ = std::make_shared<const FittedOutcome>(std::move(selection.model));
  }

  // The balanced phase had no rule; it is assigned the first estimated rule.
  void backfill_rules(std::size_t n) {
    for (std::size_t t = kFirst; t <= n; ++t) {
      StepRecord& rec = result_.steps[t - 1];
      rec.blip = model_->blip(context(t));
      rec.d = rule_decision(rec.blip);
      rec.has_rule = true;
    }
  }

  void adaptive_step(std::size_t t) {
    open_step(t);
    const ContextSummary& ctx = context(t);
    const PolicyState state{config_.policy_mode, config_.c_schedule.value(t),
                            config_.e_schedule.value(t), model_};
    StepRecord rec;
    rec.blip = model_->blip(ctx);
    rec.assign_blip = rec.blip;
    rec.d = rule_decision(rec.blip);
    rec.has_rule = true;
    rec.g1 = treatment_prob(state, ctx);
    commit_step(draw_action(rec.g1, rng_), rec);
  }

  void evaluate(std::size_t n) {
    std::vector<TmleRow> rows;
    std::vector<int> rules;
    rows.reserve(n - kBurnInLength);
    rules.reserve(n - kBurnInLength);
    for (std::size_t t = kFirst; t <= n; ++t) {
      const Block& b = result_.history.at(t);
      const StepRecord& rec = result_.steps[t - 1];
      const ContextSummary& ctx = context(t);
      rows.push_back({b.a, b.y, rec.g1, rec.d, model_->qbar(ctx, b.a),
                      model_->qbar(ctx, rec.d)});
      rules.push_back(rec.d);
    }
    CheckpointResult cp;
    cp.n = n;
    cp.report = tmle_estimate(rows, config_.tmle_options());
    cp.truth = data_adaptive_truth(
        std::span(oracle_ctx_).first(n - kBurnInLength), rules, config_.dgp);
    cp.covered = cp.report.ci_lower <= cp.truth && cp.truth <= cp.report.ci_upper;
    cp.selected = selected_;
    result_.checkpoints.push_back(std::move(cp));
  }

  const TrialConfig& config_;
  FitSettings settings_;
  ContextSpec oracle_spec_;
  Rng rng_;
  TrialResult result_;
  std::vector<ContextSummary> est_ctx_;
  std::vector<ContextSummary> oracle_ctx_;
  std::shared_ptr<const FittedOutcome> model_;
  std::string selected_;
};

}  // namespace

TrialResult run_adaptive_trial(const TrialConfig& config, std::uint64_t seed) {
  config.validate();
  return TrialRunner(config, seed).run();
}

double data_adaptive_truth(std::span<const ContextSummary> oracle_contexts,
                           std::span<const int> rules, const DgpSpec& spec) {
  if (oracle_contexts.empty() || oracle_contexts.size() != rules.size()) {
    throw std::invalid_argument("data_adaptive_truth: need one rule per context");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    sum += true_conditional_mean(spec, oracle_contexts[i], rules[i]);
  }
  return sum / static_cast<double>(rules.size());
}

CoverageTable aggregate(std::span<const TrialResult> trials) {
  CoverageTable table;
  table.n_draws = trials.size();
  if (trials.empty()) return table;
  const std::size_t k = trials.front().checkpoints.size();
  for (const auto& trial : trials) {
    if (trial.checkpoints.size() != k) {
      throw std::invalid_argument("aggregate: trials disagree on checkpoints");
    }
  }
  const double draws = static_cast<double>(trials.size());
  for (std::size_t j = 0; j < k; ++j) {
    double covered = 0.0;
    double mean = 0.0;
    double truth = 0.0;
    for (const auto& trial : trials) {
      covered += trial.checkpoints[j].covered ? 1.0 : 0.0;
      mean += trial.checkpoints[j].report.psi_hat;
      truth += trial.checkpoints[j].truth;
    }
    mean /= draws;
    double ss = 0.0;
    for (const auto& trial : trials) {
      const double dev = trial.checkpoints[j].report.psi_hat - mean;
      ss += dev * dev;
    }
    table.checkpoints.push_back(trials.front().checkpoints[j].n);
    table.coverage.push_back(100.0 * covered / draws);
    table.variance.push_back(trials.size() > 1
                                 ? ss / (draws - 1.0)
                                 : std::numeric_limits<double>::quiet_NaN());
    table.mean_psi.push_back(mean);
    table.mean_truth.push_back(truth / draws);
  }
  return table;
}

McResult mc_coverage(const TrialConfig& config, std::size_t n_draws, unsigned jobs) {
  if (n_draws < 1) throw std::invalid_argument("mc_coverage: n_draws must be >= 1");
  config.validate();
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n_draws));

  McResult out;
  out.trials.resize(n_draws);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t i = next++; i < n_draws; i = next++) {
      try {
        TrialResult trial = run_adaptive_trial(config, config.seed + i);
        trial.history = TrialHistory();
        trial.steps.clear();
        for (auto& cp : trial.checkpoints) cp.report.q_star_d.clear();
        out.trials[i] = std::move(trial);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  out.table = aggregate(out.trials);
  return out;
}

}  // namespace nof1
