#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/stat.h>
#include <unistd.h>

#include "nof1/cli.hpp"
#include "nof1/io.hpp"

using namespace nof1;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "nof1-test-XXXXXX").string();
    path_ = mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::permissions(path_, fs::perms::owner_all, fs::perm_options::add, ec);
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nof1");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const char* kSmallConfig = R"({
  "schema_version": 1,
  "dgp_id": "sim1a",
  "initial_n": 200,
  "checkpoint_step": 100,
  "max_n": 400
})";

}  // namespace

TEST(ConfigJson, RoundTrip) {
  TrialConfig cfg = preset_config("sim1b", 500);
  cfg.c_schedule = Schedule({{1, 0.2}, {800, 0.1}});
  cfg.estimator.candidates.push_back({CandidateKind::kLassoBlip, kUnboundedL1});
  cfg.estimator.candidates.push_back({CandidateKind::kLassoBlip, 1.25});
  cfg.context.include_blip_estimate = true;
  cfg.seed = 99;
  const nlohmann::json j = config_to_json(cfg);
  const TrialConfig back = config_from_json(j);
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.c_schedule.value(900), 0.1);
  EXPECT_TRUE(std::isinf(back.estimator.candidates[2].l1_bound));
  EXPECT_EQ(back.estimator.candidates[3].l1_bound, 1.25);
}

TEST(ConfigJson, CustomDgpRoundTrip) {
  TrialConfig cfg = preset_config("sim1a", 200);
  cfg.dgp = sim1b_dgp();
  cfg.dgp.name = "mine";
  cfg.dgp_id = "custom";
  cfg.context = cfg.dgp.oracle_context();
  const nlohmann::json j = config_to_json(cfg);
  const TrialConfig back = config_from_json(j);
  EXPECT_EQ(back.dgp_id, "custom");
  EXPECT_EQ(dgp_to_json(back.dgp), dgp_to_json(cfg.dgp));
}

TEST(ConfigJson, ErrorsNameTheField) {
  auto field = [](const std::string& text) {
    try {
      config_from_json(nlohmann::json::parse(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field(R"({"dgp_id": "sim7"})"), "dgp_id");
  EXPECT_EQ(field(R"({"policy": {"c": 0.9}})"), "policy.c");
  EXPECT_EQ(field(R"({"policy": {"mode": "greedy"}})"), "policy.mode");
  EXPECT_EQ(field(R"({"bogus": 1})"), "bogus");
  EXPECT_EQ(field(R"({"initial_n": -5})"), "initial_n");
  EXPECT_EQ(field(R"({"estimator": {"candidates": ["xgboost"]}})"), "estimator.candidates[0]");
  EXPECT_EQ(field(R"({"estimator": {"candidates": ["lasso_blip"]}})"),
            "estimator.candidates[0].M");
  EXPECT_EQ(field(R"({"schema_version": 2})"), "schema_version");
  EXPECT_EQ(field(R"({"context": {"lags": [{"var": "W9", "lags": [1]}]}})"), "context");
  EXPECT_EQ(field(R"({"max_n": 1900})"), "checkpoint_step");
}

TEST(FormatReal, SeventeenDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(1.0), "1");
  EXPECT_EQ(format_real(std::nan("")), "nan");
}

TEST(TrajectoryCsv, RoundTrip) {
  TrialConfig cfg = preset_config("sim1a", 200);
  cfg.max_n = 400;
  const TrialResult trial = run_adaptive_trial(cfg, 3);
  std::stringstream ss;
  write_trajectory_csv(ss, trial);
  const auto rows = read_trajectory_csv(ss);
  ASSERT_EQ(rows.size(), 400u);
  for (std::size_t t = 1; t <= rows.size(); ++t) {
    EXPECT_EQ(rows[t - 1].block.a, trial.history.at(t).a);
    EXPECT_EQ(rows[t - 1].block.w, trial.history.at(t).w);
    EXPECT_EQ(rows[t - 1].g_used, trial.steps[t - 1].g1);
    EXPECT_EQ(rows[t - 1].d_decision.has_value(), t > kBurnInLength);
    if (t > kBurnInLength) EXPECT_EQ(*rows[t - 1].blip_estimate, trial.steps[t - 1].blip);
  }
}

TEST(TrajectoryCsv, MalformedInput) {
  std::istringstream empty("");
  EXPECT_THROW(read_trajectory_csv(empty), ParseError);
  std::istringstream header_only("t,a,y,g_used,blip_estimate,d_decision\n");
  EXPECT_THROW(read_trajectory_csv(header_only), ParseError);
  std::istringstream missing_column("t,a,y\n1,0,1\n");
  EXPECT_THROW(read_trajectory_csv(missing_column), ParseError);
  std::istringstream bad_value("t,a,y,g_used,blip_estimate,d_decision\n1,2,1,0.5,,\n");
  EXPECT_THROW(read_trajectory_csv(bad_value), ParseError);
  std::istringstream out_of_order("t,a,y,g_used,blip_estimate,d_decision\n2,1,1,0.5,,\n");
  EXPECT_THROW(read_trajectory_csv(out_of_order), ParseError);
}

TEST(Diagnose, ConstantDesignGivesConstantPath) {
  // No covariates, intercept-only fit; outcomes balanced within each arm so
  // every fitted mean is exactly 1/2 and the fluctuation is zero.
  std::ostringstream csv;
  csv << "t,a,y,g_used,blip_estimate,d_decision\n";
  for (int t = 1; t <= 4; ++t) csv << t << ",0,0,0.5,,\n";
  for (int t = 5; t <= 124; ++t) {
    csv << t << ',' << ((t / 2) % 2) << ',' << (t % 2) << ",0.5,0,0\n";
  }
  std::istringstream in(csv.str());
  const auto rows = read_trajectory_csv(in);

  TrialConfig cfg = preset_config("sim1a", 100);
  cfg.max_n = 100;
  cfg.context = ContextSpec{};
  cfg.estimator.candidates = {{CandidateKind::kInterceptOnly, 0}};
  const auto path = diagnose_trajectory(rows, cfg);
  ASSERT_EQ(path.size(), 120u);
  for (const auto& [n, v] : path) EXPECT_NEAR(v, 0.5, 1e-12) << n;
}

TEST(Cli, SimulateIsDeterministic) {
  TempDir dir;
  const auto a = cli({"simulate", "--preset", "sim1a", "--seed", "1", "--out",
                      (dir.path() / "a.csv").string()});
  const auto b = cli({"simulate", "--preset", "sim1a", "--seed", "1", "--out",
                      (dir.path() / "b.csv").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string text = slurp(dir.path() / "a.csv");
  EXPECT_EQ(line_count(text), 1800u + 1u);
  EXPECT_EQ(text, slurp(dir.path() / "b.csv"));
}

TEST(Cli, UnknownDgpIsValidationError) {
  TempDir dir;
  write_file(dir.path() / "bad.json", R"({"dgp_id": "sim3"})");
  const auto r = cli({"simulate", "--config", (dir.path() / "bad.json").string(), "--out",
                      (dir.path() / "x.csv").string()});
  EXPECT_EQ(r.code, kExitInvalid);
  EXPECT_NE(r.err.find("dgp_id"), std::string::npos);
}

TEST(Cli, MalformedJsonIsValidationError) {
  TempDir dir;
  write_file(dir.path() / "bad.json", "{ not json");
  const auto r = cli({"mc", "--config", (dir.path() / "bad.json").string(), "--out",
                      (dir.path() / "o").string()});
  EXPECT_EQ(r.code, kExitInvalid);
}

TEST(Cli, BadFlagsAreValidationErrors) {
  EXPECT_EQ(cli({"simulate", "--preset", "sim5", "--out", "x.csv"}).code, kExitInvalid);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitInvalid);
  EXPECT_EQ(cli({"mc", "--draws", "0", "--out", "o"}).code, kExitInvalid);
  EXPECT_EQ(cli({"--version"}).code, kExitOk);
}

TEST(Cli, MissingConfigFileIsIoError) {
  EXPECT_EQ(cli({"simulate", "--config", "/nonexistent/cfg.json", "--out", "x.csv"}).code,
            kExitIo);
}

TEST(Cli, McWritesFilesAndManifest) {
  TempDir dir;
  write_file(dir.path() / "cfg.json", kSmallConfig);
  const auto out = dir.path() / "run";
  const auto r = cli({"mc", "--config", (dir.path() / "cfg.json").string(), "--draws", "1",
                      "--jobs", "1", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string coverage = slurp(out / "coverage.csv");
  EXPECT_EQ(line_count(coverage), 4u);
  std::istringstream lines(coverage);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "checkpoint,coverage,variance");
  while (std::getline(lines, line)) {
    const auto value = line.substr(line.find(',') + 1, line.rfind(',') - line.find(',') - 1);
    EXPECT_TRUE(value == "0" || value == "100") << line;
  }
  EXPECT_EQ(line_count(slurp(out / "trials.jsonl")), 1u);
  EXPECT_EQ(line_count(slurp(out / "plotdata.csv")), 4u);

  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  for (const char* f : {"coverage.csv", "trials.jsonl", "plotdata.csv"}) {
    EXPECT_EQ(manifest["digests"][f], sha256_file(out / f));
  }
  EXPECT_EQ(manifest["config"]["initial_n"], 200);
  EXPECT_EQ(manifest["seed"], 1);
}

TEST(Cli, UnwritableOutputIsIoError) {
  if (geteuid() == 0) GTEST_SKIP() << "permission bits do not bind for root";
  TempDir dir;
  fs::permissions(dir.path(), fs::perms::owner_read | fs::perms::owner_exec);
  write_file(dir.path() / "cfg.json", kSmallConfig);
  const auto r = cli({"mc", "--preset", "sim1a", "--draws", "1", "--out",
                      (dir.path() / "sub").string()});
  EXPECT_EQ(r.code, kExitIo);
}

TEST(Cli, OutputPathBlockedByFileIsIoError) {
  TempDir dir;
  write_file(dir.path() / "blocker", "x");
  const auto r = cli({"mc", "--preset", "sim1a", "--draws", "1", "--out",
                      (dir.path() / "blocker" / "sub").string()});
  EXPECT_EQ(r.code, kExitIo);
}

TEST(Cli, DiagnoseRejectsEmptyTrialFile) {
  TempDir dir;
  write_file(dir.path() / "empty.csv", "");
  const auto r = cli({"diagnose", (dir.path() / "empty.csv").string(), "--out",
                      (dir.path() / "d.csv").string()});
  EXPECT_EQ(r.code, kExitInvalid);
}

TEST(Cli, DiagnoseSimulatedTrial) {
  TempDir dir;
  write_file(dir.path() / "cfg.json", kSmallConfig);
  const auto cfg = (dir.path() / "cfg.json").string();
  ASSERT_EQ(cli({"simulate", "--config", cfg, "--out", (dir.path() / "t.csv").string()}).code, 0);
  const auto r = cli({"diagnose", (dir.path() / "t.csv").string(), "--config", cfg, "--out",
                      (dir.path() / "d.csv").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(dir.path() / "d.csv");
  EXPECT_EQ(line_count(text), 400u - kBurnInLength + 1u);
  EXPECT_EQ(text.substr(0, text.find('\n')), "n,running_cond_var_avg");
}
