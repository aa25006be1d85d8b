#pragma once

// Domain types shared by the simulator, the estimators and the trial harness.
//
// Time indices are 1-based throughout: block t of a history is the record
// (A(t), Y(t), W(t)), and the context for time t is built from blocks
// 1..t-1 only.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nof1 {

using Rng = std::mt19937_64;

// Uniform draw on [0, 1) from the top 53 bits of the stream.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingHistoryError : public Error {
 public:
  using Error::Error;
};

class SpecificationError : public Error {
 public:
  using Error::Error;
};

class PositivityError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

// Configuration problem tied to a named field (e.g. "policy.c").
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct Block {
  int a = 0;
  double y = 0.0;
  std::vector<double> w;
};

class TrialHistory {
 public:
  TrialHistory() = default;
  TrialHistory(std::vector<Block> blocks, std::size_t burn_in);

  std::size_t size() const { return blocks_.size(); }
  std::size_t burn_in() const { return burn_in_; }
  bool empty() const { return blocks_.empty(); }

  // 1-based access; throws MissingHistoryError when t is outside 1..size().
  const Block& at(std::size_t t) const;
  const std::vector<Block>& blocks() const { return blocks_; }

  void append(Block block);

 private:
  std::vector<Block> blocks_;
  std::size_t burn_in_ = 0;
};

// A source node of the time series: the treatment, the outcome, or one
// covariate component (w_index is 0-based; the textual name is "W1", "W2", ...).
struct Variable {
  enum class Kind { kA, kY, kW };
  Kind kind = Kind::kY;
  std::size_t w_index = 0;

  static Variable A() { return {Kind::kA, 0}; }
  static Variable Y() { return {Kind::kY, 0}; }
  static Variable W(std::size_t index) { return {Kind::kW, index}; }

  // Parses "A", "Y", "W1", "W2", ...; throws SpecificationError otherwise.
  static Variable parse(const std::string& name);
  std::string name() const;

  double value_in(const Block& block) const;

  friend bool operator==(const Variable&, const Variable&) = default;
};

struct LagEntry {
  Variable var;
  std::vector<int> lags;
};

struct ContextSpec {
  std::vector<LagEntry> lag_map;
  bool include_blip_estimate = false;

  std::size_t dimension() const;
  int max_lag() const;
  // Throws SpecificationError for lags < 1 or W components >= w_dim.
  void validate(std::size_t w_dim) const;
};

struct ContextSummary {
  std::vector<double> features;
  std::size_t time_index = 0;

  std::size_t dim() const { return features.size(); }
};

// Builds C_o(t) from blocks 1..t-1 in the declared lag order. When the context spec
// asks for the blip estimate, `blip_estimate` becomes the final coordinate.
ContextSummary extract_context(const TrialHistory& history, std::size_t t,
                               const ContextSpec& spec,
                               std::optional<double> blip_estimate = std::nullopt);

// Non-increasing step schedule: value(t) is the value of the last step whose
// start is <= t. A single step starting at 1 is a constant schedule.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(double constant);
  explicit Schedule(std::vector<std::pair<std::size_t, double>> steps);

  double value(std::size_t t) const;
  double limit() const;
  double first() const;
  const std::vector<std::pair<std::size_t, double>>& steps() const { return steps_; }
  bool non_increasing() const;

 private:
  std::vector<std::pair<std::size_t, double>> steps_;
};

enum class PolicyMode { kBalanced, kSmoother, kHalCi };

std::string to_string(PolicyMode mode);
PolicyMode parse_policy_mode(const std::string& name);

struct Bounds {
  double low = 0.005;
  double high = 0.995;

  double clamp(double p) const;
};

enum class CandidateKind { kInterceptOnly, kGlmMain, kGlmInteract, kLassoBlip };

struct CandidateSpec {
  CandidateKind kind = CandidateKind::kGlmMain;
  double l1_bound = 0.0;  // lasso_blip only

  std::string name() const;
};

struct EstimatorConfig {
  std::vector<CandidateSpec> candidates;
  std::size_t val_size = 30;
  std::size_t refit_every = 0;  // 0: refit at checkpoints only
  std::size_t n_boot = 100;
  double ci_level = 0.95;
};

}  // namespace nof1
