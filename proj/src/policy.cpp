#include "nof1/policy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nof1 {

namespace {

// Largest p <= 1 - c with 1 - p >= c exactly.
double upper_level(double c) {
  double p = 1.0 - c;
  while (1.0 - p < c) p = std::nextafter(p, 0.0);
  return p;
}

}  // namespace

double smoother(double x, double c, double e) {
  if (!(c > 0.0 && c <= 0.5)) throw std::invalid_argument("smoother: c must lie in (0, 1/2]");
  if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("smoother: e must be > 0");
  const double high = upper_level(c);
  if (x <= -e) return c;
  if (x >= e) return high;
  const double r = x / e;
  const double shape = 0.5 * r * (3.0 - r * r);
  return std::clamp(0.5 + (0.5 - c) * shape, c, high);
}

double treatment_prob(const PolicyState& state, const ContextSummary& context) {
  if (state.mode == PolicyMode::kBalanced) return 0.5;
  if (!state.blip_source) throw StateError("policy has no fitted blip estimator");
  const double blip = std::clamp(state.blip_source->blip(context), -1.0, 1.0);
  if (state.mode == PolicyMode::kSmoother) return smoother(blip, state.c, state.e);
  if (!state.blip_source->blip_ci) {
    throw StateError("hal_ci policy requires a bootstrap blip band");
  }
  const double width = state.blip_source->blip_ci->half_width(context.features);
  return smoother(blip, state.c, std::max(state.e, width));
}

int draw_action(double p, Rng& rng) { return uniform01(rng) < p ? 1 : 0; }

}  // namespace nof1
