#pragma once

// Explore-exploit treatment assignment from an estimated blip.

#include <memory>

#include "nof1/core.hpp"
#include "nof1/outcome.hpp"

namespace nof1 {

// Cubic smoother G(x): c for x <= -e, 1-c for x >= e, and the cubic
// 1/2 + (1/2 - c) * (3x/(2e) - x^3/(2e^3)) in between. The output lies in
// [c, 1-c] and 1 - G(x) >= c holds exactly in floating point.
// Throws std::invalid_argument unless c in (0, 1/2] and e > 0.
double smoother(double x, double c, double e);

struct PolicyState {
  PolicyMode mode = PolicyMode::kBalanced;
  double c = 0.1;
  double e = 0.05;
  std::shared_ptr<const FittedOutcome> blip_source;
};

// P(A=1 | context) under the current policy. In hal_ci mode the smoothing
// window is max(e, bootstrap half-width at the context).
double treatment_prob(const PolicyState& state, const ContextSummary& context);

// Rule implied by a blip value; ties at zero go to control.
inline int rule_decision(double blip) { return blip > 0.0 ? 1 : 0; }

int draw_action(double p, Rng& rng);

}  // namespace nof1
