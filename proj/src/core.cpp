#include "nof1/core.hpp"

#include <algorithm>
#include <limits>

namespace nof1 {

TrialHistory::TrialHistory(std::vector<Block> blocks, std::size_t burn_in)
    : blocks_(std::move(blocks)), burn_in_(burn_in) {
  if (burn_in_ > blocks_.size()) {
    throw SpecificationError("burn-in longer than history");
  }
}

const Block& TrialHistory::at(std::size_t t) const {
  if (t < 1 || t > blocks_.size()) {
    throw MissingHistoryError("no block at time " + std::to_string(t) +
                              " (history has " + std::to_string(blocks_.size()) +
                              ")");
  }
  return blocks_[t - 1];
}

void TrialHistory::append(Block block) { blocks_.push_back(std::move(block)); }

Variable Variable::parse(const std::string& name) {
  if (name == "A") return A();
  if (name == "Y") return Y();
  if (name.size() >= 2 && name[0] == 'W') {
    std::size_t pos = 0;
    unsigned long index = 0;
    try {
      index = std::stoul(name.substr(1), &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == name.size() - 1 && index >= 1) return W(index - 1);
  }
  throw SpecificationError("unknown variable '" + name + "'");
}

std::string Variable::name() const {
  switch (kind) {
    case Kind::kA:
      return "A";
    case Kind::kY:
      return "Y";
    case Kind::kW:
      return "W" + std::to_string(w_index + 1);
  }
  return "?";
}

double Variable::value_in(const Block& block) const {
  switch (kind) {
    case Kind::kA:
      return static_cast<double>(block.a);
    case Kind::kY:
      return block.y;
    case Kind::kW:
      if (w_index >= block.w.size()) {
        throw SpecificationError("block has no component " + name());
      }
      return block.w[w_index];
  }
  return 0.0;
}

std::size_t ContextSpec::dimension() const {
  std::size_t d = include_blip_estimate ? 1 : 0;
  for (const auto& entry : lag_map) d += entry.lags.size();
  return d;
}

int ContextSpec::max_lag() const {
  int m = 0;
  for (const auto& entry : lag_map) {
    for (int lag : entry.lags) m = std::max(m, lag);
  }
  return m;
}

void ContextSpec::validate(std::size_t w_dim) const {
  for (const auto& entry : lag_map) {
    if (entry.var.kind == Variable::Kind::kW && entry.var.w_index >= w_dim) {
      throw SpecificationError("context references " + entry.var.name() +
                               " but the series has " + std::to_string(w_dim) +
                               " covariates");
    }
    for (int lag : entry.lags) {
      if (lag < 1) {
        throw SpecificationError("context lag for " + entry.var.name() +
                                 " must be >= 1");
      }
    }
  }
}

ContextSummary extract_context(const TrialHistory& history, std::size_t t,
                               const ContextSpec& spec,
                               std::optional<double> blip_estimate) {
  if (t < 1) throw MissingHistoryError("time index must be >= 1");
  ContextSummary out;
  out.time_index = t;
  out.features.reserve(spec.dimension());
  for (const auto& entry : spec.lag_map) {
    for (int lag : entry.lags) {
      if (lag < 1) {
        throw SpecificationError("context lag for " + entry.var.name() +
                                 " must be >= 1");
      }
      if (static_cast<std::size_t>(lag) >= t) {
        throw MissingHistoryError(entry.var.name() + " lag " +
                                  std::to_string(lag) + " precedes time 1 at t=" +
                                  std::to_string(t));
      }
      out.features.push_back(entry.var.value_in(history.at(t - lag)));
    }
  }
  if (spec.include_blip_estimate) {
    if (!blip_estimate) {
      throw SpecificationError("context requires a blip estimate");
    }
    out.features.push_back(*blip_estimate);
  }
  return out;
}

Schedule::Schedule(double constant) : steps_{{1, constant}} {}

Schedule::Schedule(std::vector<std::pair<std::size_t, double>> steps)
    : steps_(std::move(steps)) {
  std::sort(steps_.begin(), steps_.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  if (steps_.empty() || steps_.front().first > 1) {
    throw SpecificationError("schedule must define a value from t=1");
  }
}

double Schedule::value(std::size_t t) const {
  double v = steps_.front().second;
  for (const auto& [start, value] : steps_) {
    if (start > t) break;
    v = value;
  }
  return v;
}

double Schedule::limit() const { return steps_.back().second; }
double Schedule::first() const { return steps_.front().second; }

bool Schedule::non_increasing() const {
  for (std::size_t i = 1; i < steps_.size(); ++i) {
    if (steps_[i].second > steps_[i - 1].second) return false;
  }
  return true;
}

std::string to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::kBalanced:
      return "balanced";
    case PolicyMode::kSmoother:
      return "smoother";
    case PolicyMode::kHalCi:
      return "hal_ci";
  }
  return "?";
}

PolicyMode parse_policy_mode(const std::string& name) {
  if (name == "balanced") return PolicyMode::kBalanced;
  if (name == "smoother") return PolicyMode::kSmoother;
  if (name == "hal_ci") return PolicyMode::kHalCi;
  throw ConfigError("policy.mode", "unknown mode '" + name + "'");
}

double Bounds::clamp(double p) const { return std::clamp(p, low, high); }

std::string CandidateSpec::name() const {
  switch (kind) {
    case CandidateKind::kInterceptOnly:
      return "intercept_only";
    case CandidateKind::kGlmMain:
      return "glm_main";
    case CandidateKind::kGlmInteract:
      return "glm_interact";
    case CandidateKind::kLassoBlip:
      return "lasso_blip";
  }
  return "?";
}

}  // namespace nof1
