#include "nof1/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "nof1/io.hpp"

#ifndef NOF1_VERSION
#define NOF1_VERSION "0.0.0"
#endif

namespace nof1 {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class IoError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config_path;
  std::string preset = "sim1a";
  std::optional<std::uint64_t> seed;
  std::size_t draws = 500;
  std::string out;
  unsigned jobs = 0;
  std::string trial_path;
};

TrialConfig load_config(const Options& opt) {
  TrialConfig cfg;
  if (opt.config_path.empty()) {
    cfg = preset_config(opt.preset, 1000);
  } else {
    std::ifstream in(opt.config_path);
    if (!in) throw IoError("cannot read config " + opt.config_path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(opt.config_path + ": " + e.what());
    }
    cfg = config_from_json(j, opt.preset);
  }
  if (opt.seed) cfg.seed = *opt.seed;
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
}

// UTC ISO-8601. SOURCE_DATE_EPOCH, when set, pins the clock for
// reproducible manifests.
std::string timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* pinned = std::getenv("SOURCE_DATE_EPOCH")) {
    now = static_cast<std::time_t>(std::strtoll(pinned, nullptr, 10));
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void cmd_simulate(const Options& opt, std::ostream& log) {
  if (opt.out.empty()) throw ConfigError("--out", "output path required");
  const TrialConfig cfg = load_config(opt);
  const TrialResult trial = run_adaptive_trial(cfg, cfg.seed);
  const fs::path path(opt.out);
  auto out = open_output(path);
  write_trajectory_csv(out, trial);
  finish(out, path);
  log << "wrote " << trial.history.size() << " rows to " << path.string() << '\n';
}

void cmd_mc(const Options& opt, std::ostream& log) {
  if (opt.out.empty()) throw ConfigError("--out", "output directory required");
  if (opt.draws < 1) throw ConfigError("--draws", "must be >= 1");
  const TrialConfig cfg = load_config(opt);
  const fs::path dir(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  // Fail on an unwritable directory before spending time on the draws.
  {
    auto probe = open_output(dir / "coverage.csv");
    finish(probe, dir / "coverage.csv");
  }

  const std::string started = timestamp();
  const McResult mc = mc_coverage(cfg, opt.draws, opt.jobs);

  const std::vector<std::string> files = {"coverage.csv", "trials.jsonl", "plotdata.csv"};
  {
    auto out = open_output(dir / files[0]);
    write_coverage_csv(out, mc.table);
    finish(out, dir / files[0]);
  }
  {
    auto out = open_output(dir / files[1]);
    for (const auto& trial : mc.trials) out << trial_to_json(trial).dump() << '\n';
    finish(out, dir / files[1]);
  }
  {
    auto out = open_output(dir / files[2]);
    write_plotdata_csv(out, mc.trials);
    finish(out, dir / files[2]);
  }

  json digests = json::object();
  for (const auto& f : files) digests[f] = sha256_file(dir / f);
  const json manifest = {{"tool", "nof1"},
                         {"version", NOF1_VERSION},
                         {"config", config_to_json(cfg)},
                         {"seed", cfg.seed},
                         {"draws", opt.draws},
                         {"started_at", started},
                         {"finished_at", timestamp()},
                         {"digests", digests}};
  auto out = open_output(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  finish(out, dir / "manifest.json");

  for (std::size_t k = 0; k < mc.table.checkpoints.size(); ++k) {
    log << "n=" << mc.table.checkpoints[k] << " coverage=" << mc.table.coverage[k]
        << "% var=" << format_real(mc.table.variance[k]) << '\n';
  }
}

void cmd_diagnose(const Options& opt, std::ostream& log) {
  if (opt.out.empty()) throw ConfigError("--out", "output path required");
  const TrialConfig cfg = load_config(opt);
  std::ifstream in(opt.trial_path);
  if (!in) throw IoError("cannot read trial file " + opt.trial_path);
  const auto rows = read_trajectory_csv(in);
  const auto path_values = diagnose_trajectory(rows, cfg);
  const fs::path path(opt.out);
  auto out = open_output(path);
  out << "n,running_cond_var_avg\n";
  for (const auto& [n, v] : path_values) out << n << ',' << format_real(v) << '\n';
  finish(out, path);
  log << "wrote " << path_values.size() << " rows to " << path.string() << '\n';
}

}  // namespace

const char* version_string() { return NOF1_VERSION; }

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive N-of-1 trial simulator with TMLE inference", "nof1"};
  app.set_version_flag("--version", NOF1_VERSION);
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON configuration file");
    sub->add_option("--preset", opt.preset, "Base preset")
        ->check(CLI::IsMember({"sim1a", "sim1b"}));
    sub->add_option("--seed", opt.seed, "Base seed (overrides the config)");
  };

  auto* simulate = app.add_subcommand("simulate", "Run one trial and write its trajectory CSV");
  add_common(simulate);
  simulate->add_option("--out", opt.out, "Trajectory CSV path")->required();

  auto* mc = app.add_subcommand("mc", "Monte Carlo coverage study");
  add_common(mc);
  mc->add_option("--draws", opt.draws, "Number of trials")->check(CLI::PositiveNumber);
  mc->add_option("--out", opt.out, "Output directory")->required();
  mc->add_option("--jobs", opt.jobs, "Worker threads (0 = all processors)");

  auto* diagnose = app.add_subcommand("diagnose", "Running conditional-variance path of a trajectory");
  add_common(diagnose);
  diagnose->add_option("trial", opt.trial_path, "Trajectory CSV written by simulate")->required();
  diagnose->add_option("--out", opt.out, "Output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*simulate) cmd_simulate(opt, err);
    else if (*mc) cmd_mc(opt, err);
    else cmd_diagnose(opt, err);
  } catch (const ConfigError& e) {
    err << "error: invalid config field '" << e.field() << "': " << e.what() << '\n';
    return kExitInvalid;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace nof1
