#include "nof1/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "nof1/policy.hpp"

namespace nof1 {

using nlohmann::json;

namespace {

// ---- typed field access -------------------------------------------------

double as_real(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

std::size_t as_count(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) {
    return static_cast<std::size_t>(v.get<long long>());
  }
  throw ConfigError(field, "expected a non-negative integer");
}

int as_int(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError(field, "expected true or false");
  return v.get<bool>();
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path + "." + key, "missing field");
  return *it;
}

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "config" : path,
                                          "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

Variable as_variable(const json& v, const std::string& field) {
  try {
    return Variable::parse(as_string(v, field));
  } catch (const SpecificationError& e) {
    throw ConfigError(field, e.what());
  }
}

// ---- schedules and candidates --------------------------------------------

json schedule_to_json(const Schedule& s) {
  if (s.steps().size() == 1) return s.first();
  json arr = json::array();
  for (const auto& [start, value] : s.steps()) arr.push_back({start, value});
  return arr;
}

Schedule schedule_from_json(const json& v, const std::string& field) {
  if (v.is_number()) return Schedule(v.get<double>());
  if (!v.is_array() || v.empty()) {
    throw ConfigError(field, "expected a number or [[t, value], ...]");
  }
  std::vector<std::pair<std::size_t, double>> steps;
  for (const auto& step : v) {
    if (!step.is_array() || step.size() != 2) {
      throw ConfigError(field, "schedule steps must be [t, value] pairs");
    }
    steps.emplace_back(as_count(step[0], field), as_real(step[1], field));
  }
  try {
    return Schedule(std::move(steps));
  } catch (const SpecificationError& e) {
    throw ConfigError(field, e.what());
  }
}

json candidate_to_json(const CandidateSpec& c) {
  if (c.kind != CandidateKind::kLassoBlip) return c.name();
  json m = std::isinf(c.l1_bound) ? json("inf") : json(c.l1_bound);
  return {{"name", c.name()}, {"M", m}};
}

CandidateSpec candidate_from_json(const json& v, const std::string& field) {
  std::string name;
  CandidateSpec c;
  if (v.is_string()) {
    name = v.get<std::string>();
  } else if (v.is_object()) {
    reject_unknown(v, {"name", "M"}, field);
    name = as_string(member(v, "name", field), field + ".name");
  } else {
    throw ConfigError(field, "expected a candidate name or object");
  }
  if (name == "intercept_only") {
    c.kind = CandidateKind::kInterceptOnly;
  } else if (name == "glm_main") {
    c.kind = CandidateKind::kGlmMain;
  } else if (name == "glm_interact") {
    c.kind = CandidateKind::kGlmInteract;
  } else if (name == "lasso_blip") {
    c.kind = CandidateKind::kLassoBlip;
    if (!v.is_object() || !v.contains("M")) {
      throw ConfigError(field + ".M", "lasso_blip requires an L1 bound M");
    }
    const json& m = v.at("M");
    c.l1_bound = m.is_string() && m.get<std::string>() == "inf"
                     ? kUnboundedL1
                     : as_real(m, field + ".M");
  } else {
    throw ConfigError(field, "unknown candidate '" + name + "'");
  }
  return c;
}

// ---- DGP pieces -------------------------------------------------------------

json marginal_to_json(const Marginal& m) {
  if (m.kind == Marginal::Kind::kBernoulli) return {{"bernoulli", m.location}};
  return {{"normal", {m.location, m.scale}}};
}

Marginal marginal_from_json(const json& v, const std::string& field) {
  if (v.is_object() && v.size() == 1 && v.contains("bernoulli")) {
    return {Marginal::Kind::kBernoulli, as_real(v.at("bernoulli"), field), 0.0};
  }
  if (v.is_object() && v.size() == 1 && v.contains("normal")) {
    const json& p = v.at("normal");
    if (!p.is_array() || p.size() != 2) {
      throw ConfigError(field, "normal marginal needs [mean, sd]");
    }
    return {Marginal::Kind::kNormal, as_real(p[0], field), as_real(p[1], field)};
  }
  throw ConfigError(field, "expected {\"bernoulli\": p} or {\"normal\": [mean, sd]}");
}

json terms_to_json(const std::vector<LinearTerm>& terms) {
  json arr = json::array();
  for (const auto& t : terms) {
    arr.push_back({{"var", t.var.name()}, {"lag", t.lag}, {"coef", t.coef}});
  }
  return arr;
}

std::vector<LinearTerm> terms_from_json(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of terms");
  std::vector<LinearTerm> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    reject_unknown(v[i], {"var", "lag", "coef"}, f);
    out.push_back({as_variable(member(v[i], "var", f), f + ".var"),
                   as_int(member(v[i], "lag", f), f + ".lag"),
                   as_real(member(v[i], "coef", f), f + ".coef")});
  }
  return out;
}

// ---- CSV helpers -------------------------------------------------------------

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_real(const std::string& s, std::size_t line, const std::string& col) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (s.empty() || end != begin + s.size() || !std::isfinite(v)) {
    throw ParseError("line " + std::to_string(line) + ": bad value '" + s +
                     "' in column " + col);
  }
  return v;
}

}  // namespace

// ---- configuration --------------------------------------------------------

nlohmann::json context_to_json(const ContextSpec& spec) {
  json lags = json::array();
  for (const auto& e : spec.lag_map) lags.push_back({{"var", e.var.name()}, {"lags", e.lags}});
  return {{"lags", lags}, {"include_blip_estimate", spec.include_blip_estimate}};
}

ContextSpec context_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"lags", "include_blip_estimate"}, "context");
  ContextSpec spec;
  if (j.contains("lags")) {
    const json& lags = j.at("lags");
    if (!lags.is_array()) throw ConfigError("context.lags", "expected an array");
    for (std::size_t i = 0; i < lags.size(); ++i) {
      const std::string f = "context.lags[" + std::to_string(i) + "]";
      reject_unknown(lags[i], {"var", "lags"}, f);
      LagEntry entry{as_variable(member(lags[i], "var", f), f + ".var"), {}};
      const json& ls = member(lags[i], "lags", f);
      if (!ls.is_array()) throw ConfigError(f + ".lags", "expected an array");
      for (const auto& l : ls) {
        const int lag = as_int(l, f + ".lags");
        if (lag < 1) throw ConfigError(f + ".lags", "lags must be >= 1");
        entry.lags.push_back(lag);
      }
      spec.lag_map.push_back(std::move(entry));
    }
  }
  if (j.contains("include_blip_estimate")) {
    spec.include_blip_estimate =
        as_bool(j.at("include_blip_estimate"), "context.include_blip_estimate");
  }
  return spec;
}

nlohmann::json dgp_to_json(const DgpSpec& spec) {
  json burn_w = json::array();
  for (const auto& m : spec.burn_in.w) burn_w.push_back(marginal_to_json(m));
  json w_eqs = json::array();
  for (const auto& eq : spec.w) {
    w_eqs.push_back({{"family", eq.family == WEquation::Family::kLogistic ? "logistic"
                                                                          : "gaussian"},
                     {"intercept", eq.intercept},
                     {"terms", terms_to_json(eq.terms)}});
  }
  return {{"name", spec.name},
          {"burn_in", {{"a", marginal_to_json(spec.burn_in.a)},
                       {"y", marginal_to_json(spec.burn_in.y)},
                       {"w", burn_w}}},
          {"y_equation", {{"intercept", spec.y.intercept},
                          {"coef_a", spec.y.coef_a},
                          {"terms", terms_to_json(spec.y.terms)}}},
          {"w_equations", w_eqs},
          {"noise_sd", spec.noise_sd}};
}

DgpSpec dgp_from_json(const nlohmann::json& j) {
  reject_unknown(j, {"name", "burn_in", "y_equation", "w_equations", "noise_sd"}, "dgp");
  DgpSpec spec;
  spec.name = j.contains("name") ? as_string(j.at("name"), "dgp.name") : "custom";

  const json& burn = member(j, "burn_in", "dgp");
  reject_unknown(burn, {"a", "y", "w"}, "dgp.burn_in");
  spec.burn_in.a = marginal_from_json(member(burn, "a", "dgp.burn_in"), "dgp.burn_in.a");
  spec.burn_in.y = marginal_from_json(member(burn, "y", "dgp.burn_in"), "dgp.burn_in.y");
  const json& bw = member(burn, "w", "dgp.burn_in");
  if (!bw.is_array()) throw ConfigError("dgp.burn_in.w", "expected an array");
  for (std::size_t i = 0; i < bw.size(); ++i) {
    spec.burn_in.w.push_back(
        marginal_from_json(bw[i], "dgp.burn_in.w[" + std::to_string(i) + "]"));
  }

  const json& ye = member(j, "y_equation", "dgp");
  reject_unknown(ye, {"intercept", "coef_a", "terms"}, "dgp.y_equation");
  spec.y.intercept =
      ye.contains("intercept") ? as_real(ye.at("intercept"), "dgp.y_equation.intercept")
                               : 0.0;
  spec.y.coef_a = as_real(member(ye, "coef_a", "dgp.y_equation"), "dgp.y_equation.coef_a");
  spec.y.terms = terms_from_json(member(ye, "terms", "dgp.y_equation"),
                                 "dgp.y_equation.terms");

  const json& we = member(j, "w_equations", "dgp");
  if (!we.is_array()) throw ConfigError("dgp.w_equations", "expected an array");
  for (std::size_t i = 0; i < we.size(); ++i) {
    const std::string f = "dgp.w_equations[" + std::to_string(i) + "]";
    reject_unknown(we[i], {"family", "intercept", "terms"}, f);
    WEquation eq;
    const std::string fam = as_string(member(we[i], "family", f), f + ".family");
    if (fam == "logistic") {
      eq.family = WEquation::Family::kLogistic;
    } else if (fam == "gaussian") {
      eq.family = WEquation::Family::kGaussian;
    } else {
      throw ConfigError(f + ".family", "expected \"logistic\" or \"gaussian\"");
    }
    eq.intercept =
        we[i].contains("intercept") ? as_real(we[i].at("intercept"), f + ".intercept") : 0.0;
    eq.terms = terms_from_json(member(we[i], "terms", f), f + ".terms");
    spec.w.push_back(std::move(eq));
  }
  if (j.contains("noise_sd")) spec.noise_sd = as_real(j.at("noise_sd"), "dgp.noise_sd");
  try {
    spec.validate();
  } catch (const SpecificationError& e) {
    throw ConfigError("dgp", e.what());
  }
  return spec;
}

TrialConfig config_from_json(const nlohmann::json& j, const std::string& fallback_preset) {
  reject_unknown(j,
                 {"schema_version", "dgp_id", "dgp", "context", "initial_n",
                  "checkpoint_step", "max_n", "policy", "alpha", "q_bounds", "g_floor",
                  "estimator", "seed"},
                 "");
  if (j.contains("schema_version") &&
      as_int(j.at("schema_version"), "schema_version") != kConfigSchemaVersion) {
    throw ConfigError("schema_version", "unsupported schema version");
  }
  const std::string dgp_id =
      j.contains("dgp_id") ? as_string(j.at("dgp_id"), "dgp_id") : fallback_preset;
  const std::size_t initial_n =
      j.contains("initial_n") ? as_count(j.at("initial_n"), "initial_n") : 1000;

  TrialConfig cfg;
  if (dgp_id == "custom") {
    cfg = preset_config("sim1a", initial_n);
    if (!j.contains("dgp")) throw ConfigError("dgp", "custom dgp_id requires a dgp object");
    cfg.dgp = dgp_from_json(j.at("dgp"));
    cfg.dgp_id = "custom";
    cfg.context = cfg.dgp.oracle_context();
  } else {
    cfg = preset_config(dgp_id, initial_n);  // throws ConfigError("dgp_id")
    if (j.contains("dgp")) throw ConfigError("dgp", "only allowed with dgp_id \"custom\"");
  }
  if (j.contains("max_n")) {
    cfg.max_n = as_count(j.at("max_n"), "max_n");
  }
  if (j.contains("context")) cfg.context = context_from_json(j.at("context"));
  if (j.contains("checkpoint_step")) {
    cfg.checkpoint_step = as_count(j.at("checkpoint_step"), "checkpoint_step");
  }
  if (j.contains("policy")) {
    const json& p = j.at("policy");
    reject_unknown(p, {"mode", "c", "e"}, "policy");
    if (p.contains("mode")) {
      cfg.policy_mode = parse_policy_mode(as_string(p.at("mode"), "policy.mode"));
    }
    if (p.contains("c")) cfg.c_schedule = schedule_from_json(p.at("c"), "policy.c");
    if (p.contains("e")) cfg.e_schedule = schedule_from_json(p.at("e"), "policy.e");
  }
  if (j.contains("alpha")) cfg.alpha = as_real(j.at("alpha"), "alpha");
  if (j.contains("q_bounds")) {
    const json& q = j.at("q_bounds");
    if (!q.is_array() || q.size() != 2) throw ConfigError("q_bounds", "expected [low, high]");
    cfg.q_bounds = {as_real(q[0], "q_bounds"), as_real(q[1], "q_bounds")};
  }
  if (j.contains("g_floor")) cfg.g_floor = as_real(j.at("g_floor"), "g_floor");
  if (j.contains("estimator")) {
    const json& e = j.at("estimator");
    reject_unknown(e, {"candidates", "val_size", "refit_every", "n_boot", "ci_level"},
                   "estimator");
    if (e.contains("candidates")) {
      const json& cs = e.at("candidates");
      if (!cs.is_array()) throw ConfigError("estimator.candidates", "expected an array");
      cfg.estimator.candidates.clear();
      for (std::size_t i = 0; i < cs.size(); ++i) {
        cfg.estimator.candidates.push_back(candidate_from_json(
            cs[i], "estimator.candidates[" + std::to_string(i) + "]"));
      }
    }
    if (e.contains("val_size")) {
      cfg.estimator.val_size = as_count(e.at("val_size"), "estimator.val_size");
    }
    if (e.contains("refit_every")) {
      cfg.estimator.refit_every = as_count(e.at("refit_every"), "estimator.refit_every");
    }
    if (e.contains("n_boot")) cfg.estimator.n_boot = as_count(e.at("n_boot"), "estimator.n_boot");
    if (e.contains("ci_level")) {
      cfg.estimator.ci_level = as_real(e.at("ci_level"), "estimator.ci_level");
    }
  }
  if (j.contains("seed")) cfg.seed = as_count(j.at("seed"), "seed");
  cfg.validate();
  return cfg;
}

nlohmann::json config_to_json(const TrialConfig& cfg) {
  json candidates = json::array();
  for (const auto& c : cfg.estimator.candidates) candidates.push_back(candidate_to_json(c));
  json out = {
      {"schema_version", kConfigSchemaVersion},
      {"dgp_id", cfg.dgp_id},
      {"context", context_to_json(cfg.context)},
      {"initial_n", cfg.initial_n},
      {"checkpoint_step", cfg.checkpoint_step},
      {"max_n", cfg.max_n},
      {"policy", {{"mode", to_string(cfg.policy_mode)},
                  {"c", schedule_to_json(cfg.c_schedule)},
                  {"e", schedule_to_json(cfg.e_schedule)}}},
      {"alpha", cfg.alpha},
      {"q_bounds", {cfg.q_bounds.low, cfg.q_bounds.high}},
      {"g_floor", cfg.g_floor},
      {"estimator", {{"candidates", candidates},
                     {"val_size", cfg.estimator.val_size},
                     {"refit_every", cfg.estimator.refit_every},
                     {"n_boot", cfg.estimator.n_boot},
                     {"ci_level", cfg.estimator.ci_level}}},
      {"seed", cfg.seed},
  };
  if (cfg.dgp_id == "custom") out["dgp"] = dgp_to_json(cfg.dgp);
  return out;
}

// ---- results ---------------------------------------------------------------

nlohmann::json report_to_json(const EstimateReport& r) {
  json path = json::array();
  for (const auto& [n, v] : r.cond_var_path) path.push_back({n, v});
  return {{"psi_hat", r.psi_hat},
          {"epsilon", r.epsilon},
          {"epsilon_clamped", r.epsilon_clamped},
          {"epsilon_degenerate", r.epsilon_degenerate},
          {"sigma2_hat", r.sigma2_hat},
          {"ci", {r.ci_lower, r.ci_upper}},
          {"score_residual", r.score_residual},
          {"n", r.n},
          {"cond_var_path", path}};
}

nlohmann::json trial_to_json(const TrialResult& trial) {
  json cps = json::array();
  for (const auto& cp : trial.checkpoints) {
    cps.push_back({{"checkpoint", cp.n},
                   {"selected", cp.selected},
                   {"truth", cp.truth},
                   {"covered", cp.covered},
                   {"report", report_to_json(cp.report)}});
  }
  return {{"seed", trial.seed}, {"checkpoints", cps}};
}

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const TrialResult& trial) {
  const TrialHistory& h = trial.history;
  const std::size_t w_dim = h.empty() ? 0 : h.at(1).w.size();
  out << "t,a,y";
  for (std::size_t k = 0; k < w_dim; ++k) out << ",w" << (k + 1);
  out << ",g_used,blip_estimate,d_decision\n";
  for (std::size_t t = 1; t <= h.size(); ++t) {
    const Block& b = h.at(t);
    const StepRecord& rec = trial.steps.at(t - 1);
    out << t << ',' << b.a << ',' << format_real(b.y);
    for (double w : b.w) out << ',' << format_real(w);
    out << ',' << format_real(rec.g1) << ',';
    if (rec.has_rule) out << format_real(rec.blip) << ',' << rec.d;
    else out << ',';
    out << '\n';
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw ParseError("empty trajectory file");
  const auto header = split_csv(line);
  auto find = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ParseError("trajectory header lacks column '" + name + "'");
  };
  const std::size_t c_t = find("t"), c_a = find("a"), c_y = find("y");
  const std::size_t c_g = find("g_used"), c_b = find("blip_estimate"),
                    c_d = find("d_decision");
  std::vector<std::size_t> c_w;
  for (std::size_t k = 1;; ++k) {
    auto it = std::find(header.begin(), header.end(), "w" + std::to_string(k));
    if (it == header.end()) break;
    c_w.push_back(static_cast<std::size_t>(it - header.begin()));
  }

  std::vector<TrajectoryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields");
    }
    TrajectoryRow row;
    const double t = parse_real(cells[c_t], line_no, "t");
    row.t = static_cast<std::size_t>(t);
    if (t != static_cast<double>(row.t) || row.t != rows.size() + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": time index out of sequence");
    }
    const double a = parse_real(cells[c_a], line_no, "a");
    if (a != 0.0 && a != 1.0) throw ParseError("line " + std::to_string(line_no) + ": a not in {0,1}");
    row.block.a = static_cast<int>(a);
    row.block.y = parse_real(cells[c_y], line_no, "y");
    if (row.block.y < 0.0 || row.block.y > 1.0) {
      throw ParseError("line " + std::to_string(line_no) + ": y outside [0,1]");
    }
    for (std::size_t c : c_w) row.block.w.push_back(parse_real(cells[c], line_no, header[c]));
    row.g_used = parse_real(cells[c_g], line_no, "g_used");
    if (!(row.g_used > 0.0 && row.g_used < 1.0)) {
      throw ParseError("line " + std::to_string(line_no) + ": g_used outside (0,1)");
    }
    if (!cells[c_b].empty()) row.blip_estimate = parse_real(cells[c_b], line_no, "blip_estimate");
    if (!cells[c_d].empty()) {
      const double d = parse_real(cells[c_d], line_no, "d_decision");
      if (d != 0.0 && d != 1.0) {
        throw ParseError("line " + std::to_string(line_no) + ": d_decision not in {0,1}");
      }
      row.d_decision = static_cast<int>(d);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("trajectory has no rows");
  return rows;
}

void write_coverage_csv(std::ostream& out, const CoverageTable& table) {
  out << "checkpoint,coverage,variance\n";
  for (std::size_t k = 0; k < table.checkpoints.size(); ++k) {
    out << table.checkpoints[k] << ',' << format_real(table.coverage[k]) << ','
        << format_real(table.variance[k]) << '\n';
  }
}

void write_plotdata_csv(std::ostream& out, std::span<const TrialResult> trials) {
  out << "draw,checkpoint,psi_hat,truth,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < trials.size(); ++i) {
    for (const auto& cp : trials[i].checkpoints) {
      out << i << ',' << cp.n << ',' << format_real(cp.report.psi_hat) << ','
          << format_real(cp.truth) << ',' << format_real(cp.report.ci_lower) << ','
          << format_real(cp.report.ci_upper) << '\n';
    }
  }
}

std::vector<std::pair<std::size_t, double>> diagnose_trajectory(
    std::span<const TrajectoryRow> rows, const TrialConfig& config) {
  if (rows.empty()) throw ParseError("trajectory has no rows");
  std::size_t burn = 0;
  while (burn < rows.size() && !rows[burn].d_decision) ++burn;
  if (burn == rows.size()) throw ParseError("trajectory has no rows with a rule");
  for (std::size_t i = burn; i < rows.size(); ++i) {
    if (!rows[i].d_decision) {
      throw ParseError("row " + std::to_string(i + 1) + " lacks d_decision after burn-in");
    }
  }
  std::vector<Block> blocks;
  blocks.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.block.w.size() != rows.front().block.w.size()) {
      throw ParseError("covariate count varies across rows");
    }
    blocks.push_back(r.block);
  }
  const TrialHistory history(std::move(blocks), burn);
  try {
    config.context.validate(rows.front().block.w.size());
  } catch (const SpecificationError& e) {
    throw ConfigError("context", e.what());
  }

  // Blip seen by the policy at step s; zero through the balanced phase.
  auto assign_blip = [&](std::size_t s) {
    if (s <= burn || s <= config.initial_n || !rows[s - 1].blip_estimate) return 0.0;
    return *rows[s - 1].blip_estimate;
  };

  std::vector<TrainingRow> training;
  training.reserve(rows.size() - burn);
  for (std::size_t t = burn + 1; t <= rows.size(); ++t) {
    training.push_back({extract_context(history, t, config.context, assign_blip(t - 1)),
                        rows[t - 1].block.a, rows[t - 1].block.y, rows[t - 1].g_used});
  }
  FitSettings settings = config.fit_settings();
  settings.bootstrap_ci = false;
  const auto selection = select_recursive_origin(
      config.estimator.candidates, training, config.estimator.val_size, settings);

  std::vector<TmleRow> tmle_rows;
  tmle_rows.reserve(training.size());
  for (std::size_t i = 0; i < training.size(); ++i) {
    const auto& tr = training[i];
    const int d = *rows[burn + i].d_decision;
    tmle_rows.push_back({tr.a, tr.y, tr.g1, d, selection.model.qbar(tr.context, tr.a),
                         selection.model.qbar(tr.context, d)});
  }
  const EstimateReport report = tmle_estimate(tmle_rows, config.tmle_options());
  std::vector<std::size_t> grid(tmle_rows.size());
  for (std::size_t n = 1; n <= grid.size(); ++n) grid[n - 1] = n;
  return cond_var_path(tmle_rows, report.q_star_d, grid);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

}  // namespace nof1
