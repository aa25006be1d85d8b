#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nof1/core.hpp"
#include "nof1/dgp.hpp"
#include "nof1/outcome.hpp"
#include "nof1/tmle.hpp"

namespace nof1 {

struct TrialConfig {
  std::string dgp_id = "sim1a";
  DgpSpec dgp = sim1a_dgp();
  ContextSpec context;
  std::size_t initial_n = 1000;
  std::size_t checkpoint_step = 200;
  std::size_t max_n = 1800;
  PolicyMode policy_mode = PolicyMode::kSmoother;
  Schedule c_schedule{0.10};
  Schedule e_schedule{0.05};
  double alpha = 0.05;
  Bounds q_bounds;
  double g_floor = 0.01;
  EstimatorConfig estimator;
  std::uint64_t seed = 1;

  // Throws ConfigError naming the first offending field.
  void validate() const;
  // initial_n, initial_n + step, ..., max_n
  std::vector<std::size_t> checkpoints() const;
  FitSettings fit_settings() const;
  TmleOptions tmle_options() const;
};

// Built-in designs: "sim1a" and "sim1b" with balanced phase `initial_n`,
// checkpoints every 200 steps and 800 adaptive steps. Throws
// ConfigError("dgp_id", ...) for other names.
TrialConfig preset_config(const std::string& name, std::size_t initial_n = 1000);

}  // namespace nof1
