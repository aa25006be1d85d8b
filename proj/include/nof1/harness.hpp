#pragma once

// Full adaptive trials (burn-in, balanced phase, adaptive phase with
// checkpointed TMLE) and Monte Carlo aggregation of interval coverage.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nof1/config.hpp"
#include "nof1/tmle.hpp"

namespace nof1 {

// Per-time-step assignment record. Burn-in steps carry no rule.
struct StepRecord {
  double g1 = 0.5;          // P(A=1 | context) used at assignment
  bool has_rule = false;
  int d = 0;                // rule in force for this step
  double blip = 0.0;        // blip estimate behind d
  double assign_blip = 0.0; // blip seen by the policy (0 in the balanced phase)
};

struct CheckpointResult {
  std::size_t n = 0;  // time steps so far, burn-in included
  EstimateReport report;
  double truth = 0.0;
  bool covered = false;
  std::string selected;  // winning candidate at this checkpoint
};

struct TrialResult {
  std::uint64_t seed = 0;
  std::vector<CheckpointResult> checkpoints;
  TrialHistory history;
  std::vector<StepRecord> steps;  // index t-1 for time t
};

TrialResult run_adaptive_trial(const TrialConfig& config, std::uint64_t seed);

// (1/n) sum_t Qbar_0(C_t, d_t) with oracle contexts from the DGP's own lags.
double data_adaptive_truth(std::span<const ContextSummary> oracle_contexts,
                           std::span<const int> rules, const DgpSpec& spec);

struct CoverageTable {
  std::vector<std::size_t> checkpoints;
  std::vector<double> coverage;    // percent
  std::vector<double> variance;    // sample variance of psi_hat across draws
  std::vector<double> mean_psi;
  std::vector<double> mean_truth;
  std::size_t n_draws = 0;
};

CoverageTable aggregate(std::span<const TrialResult> trials);

struct McResult {
  CoverageTable table;
  std::vector<TrialResult> trials;  // ordered by seed; histories dropped
};

// Runs seeds config.seed .. config.seed + n_draws - 1 on `jobs` threads
// (0 = hardware concurrency). Output does not depend on `jobs`.
McResult mc_coverage(const TrialConfig& config, std::size_t n_draws,
                     unsigned jobs = 0);

}  // namespace nof1
