#pragma once

// Configuration schema (JSON), result serialization, and the CSV files
// written by the command-line tool.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "nof1/config.hpp"
#include "nof1/harness.hpp"

namespace nof1 {

inline constexpr int kConfigSchemaVersion = 1;

// Malformed input file (trajectory CSV, JSON syntax).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Builds a config from JSON. The base is the preset named by "dgp_id" (or
// `fallback_preset` when the key is absent); every other key overrides it.
// Throws ConfigError naming the offending field.
TrialConfig config_from_json(const nlohmann::json& j,
                             const std::string& fallback_preset = "sim1a");
nlohmann::json config_to_json(const TrialConfig& config);

nlohmann::json dgp_to_json(const DgpSpec& spec);
DgpSpec dgp_from_json(const nlohmann::json& j);

nlohmann::json context_to_json(const ContextSpec& spec);
ContextSpec context_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const EstimateReport& report);
nlohmann::json trial_to_json(const TrialResult& trial);

// 17 significant digits; "nan" for NaN.
std::string format_real(double x);

// One row per time step: t,a,y,w1..wk,g_used,blip_estimate,d_decision.
// Steps without a rule (burn-in) leave the last two fields empty.
void write_trajectory_csv(std::ostream& out, const TrialResult& trial);

struct TrajectoryRow {
  std::size_t t = 0;
  Block block;
  double g_used = 0.5;
  std::optional<double> blip_estimate;
  std::optional<int> d_decision;
};

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in);

void write_coverage_csv(std::ostream& out, const CoverageTable& table);
void write_plotdata_csv(std::ostream& out, std::span<const TrialResult> trials);

// Refits the initial estimator on a recorded trajectory, targets it, and
// returns (n, running mean of Var(D* | C)) for n = 1..N.
std::vector<std::pair<std::size_t, double>> diagnose_trajectory(
    std::span<const TrajectoryRow> rows, const TrialConfig& config);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace nof1
