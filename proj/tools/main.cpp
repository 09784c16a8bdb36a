#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gcmp/battery.hpp"
#include "gcmp/certify.hpp"
#include "gcmp/estimation.hpp"
#include "gcmp/model_file.hpp"
#include "gcmp/scenarios.hpp"

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

// Exit codes (documented in the README):
//   0 success, 1 expectation mismatch (verify-example), 2 parse error,
//   3 path cap exceeded, 4 observation/r off support, 5 internal error.
enum ExitCode {
  kOk = 0,
  kVerifyFailed = 1,
  kParseError = 2,
  kCapExceeded = 3,
  kOffSupport = 4,
  kInternal = 5
};

struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string scenario;
  std::uint64_t seed = 20240101;
  std::size_t cap = 100000;
  double tol = gcmp::kDerivedTol;
  int n = -1;           // estimate: sample size override; battery: model count
  int replicates = -1;  // estimate: replicate override
};

json config_json(const RunConfig& c) {
  json j;
  j["command"] = c.command;
  j["input"] = c.input;
  j["output"] = c.output;
  j["scenario"] = c.scenario;
  j["seed"] = c.seed;
  j["cap"] = c.cap;
  j["tol"] = c.tol;
  j["n"] = c.n;
  j["replicates"] = c.replicates;
  return j;
}

json witness_json(const gcmp::Witness& w) {
  json j;
  j["num_theta"] = w.num.theta;
  j["num_psi"] = w.num.psi;
  j["den_theta"] = w.den.theta;
  j["den_psi"] = w.den.psi;
  j["t"] = w.t;
  j["atom"] = w.atom;
  j["path_a"] = w.path_a;
  j["path_b"] = w.path_b;
  j["detail"] = w.detail;
  return j;
}

json certificate_json(const gcmp::Certificate& c) {
  json j;
  j["condition"] = c.condition;
  j["verdict"] = gcmp::to_string(c.verdict);
  j["tolerance"] = c.tolerance;
  if (c.witness) j["witness"] = witness_json(*c.witness);
  return j;
}

json param_json(const gcmp::ParamVec& p) {
  json j = json::array();
  for (double v : p) j.push_back(v);
  return j;
}

void emit(const json& report, const RunConfig& c) {
  const std::string text = report.dump(2) + "\n";
  if (c.output.empty() || c.output == "-") {
    std::cout << text;
  } else {
    std::ofstream out(c.output);
    if (!out) throw std::runtime_error("cannot write output: " + c.output);
    out << text;
  }
}

gcmp::LoadedModel load(const RunConfig& c) {
  std::optional<gcmp::LoadedModel> loaded;
  if (!c.scenario.empty()) {
    const gcmp::Scenario& s = gcmp::find_scenario(c.scenario);
    loaded.emplace(gcmp::LoadedModel{s.build(), s.name, s.name, s.coarsener,
                                     std::nullopt});
  } else {
    if (c.input.empty())
      throw gcmp::ParseError("either --input or --scenario is required", 0, 0);
    loaded.emplace(gcmp::load_model_file(c.input, c.cap));
  }
  if (loaded->model.space().size() > c.cap)
    throw std::runtime_error("path cap exceeded");
  return std::move(*loaded);
}

json base_report(const RunConfig& c,
                 std::chrono::steady_clock::time_point start) {
  json report;
  report["tool_version"] = kVersion;
  report["config"] = config_json(c);
  report["tolerances"]["sum"] = gcmp::kSumTol;
  report["tolerances"]["derived"] = gcmp::derived_tol();
  report["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

int cmd_certify(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  gcmp::LoadedModel loaded = load(c);
  const gcmp::JointModel& model = loaded.model;

  json certs = json::array();
  certs.push_back(certificate_json(gcmp::check_car_gcmp(model)));
  certs.push_back(certificate_json(gcmp::check_car_rel(model)));
  certs.push_back(certificate_json(gcmp::check_car_abs(model)));
  certs.push_back(certificate_json(gcmp::check_car_dyn(model)));
  certs.push_back(certificate_json(gcmp::check_factorization(model)));
  certs.push_back(certificate_json(gcmp::check_independent_censoring(model)));
  certs.push_back(certificate_json(gcmp::check_stepwise_kernel_mar(model)));

  json per_r = json::array();
  for (const auto& r : gcmp::support_r_paths(model)) {
    json entry;
    entry["r"] = r;
    entry["loc"] = certificate_json(gcmp::check_car_loc(model, r));
    entry["ignorable"] = certificate_json(gcmp::check_ignorable(model, r));
    if (loaded.coarsener)
      entry["ignorable_coarse"] = certificate_json(
          gcmp::check_ignorable_coarse(model, *loaded.coarsener, r));
    per_r.push_back(std::move(entry));
  }

  json report = base_report(c, start);
  report["model_label"] = loaded.label;
  report["path_count"] = model.space().size();
  report["certificates"] = std::move(certs);
  report["per_r"] = std::move(per_r);
  report["predictable"] = gcmp::is_predictable(model);
  report["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start)
          .count();
  emit(report, c);
  return kOk;
}

int cmd_battery(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const int n = c.n < 0 ? 200 : c.n;
  const gcmp::RandomBatteryReport result =
      gcmp::run_random_battery(c.seed, n, c.cap);
  json report = base_report(c, start);
  report["battery"]["requested"] = result.requested;
  report["battery"]["evaluated"] = result.evaluated;
  report["battery"]["skipped_cap"] = result.skipped_cap;
  json viol = json::array();
  for (const auto& [index, arrows] : result.violations) {
    json v;
    v["model_index"] = index;
    v["seed"] = c.seed;
    v["violated_arrows"] = arrows;
    viol.push_back(std::move(v));
  }
  report["battery"]["violations"] = std::move(viol);
  report["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start)
          .count();
  emit(report, c);
  return kOk;
}

int cmd_estimate(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  gcmp::LoadedModel loaded = load(c);
  if (!loaded.study)
    throw gcmp::ParseError("estimate needs a study block", 0, 0);
  gcmp::StudySpec study = *loaded.study;
  if (c.n >= 0) study.n = c.n;
  if (c.replicates >= 0) study.replicates = c.replicates;

  const gcmp::JointModel& model = loaded.model;
  json report = base_report(c, start);
  report["model_label"] = loaded.label;
  report["study"]["n"] = study.n;
  report["study"]["replicates"] = study.replicates;
  report["study"]["seed"] = study.seed;
  report["study"]["true_theta"] = param_json(study.theta_true);
  report["study"]["true_psi"] = param_json(study.psi_true);

  for (const auto& [name, method] :
       {std::pair{"ignoring", gcmp::FitMethod::Ignoring},
        std::pair{"correct", gcmp::FitMethod::Correct}}) {
    report["population"][name] = gcmp::population_argmax(
        model, method, study.theta_true, study.psi_true, study.theta_template,
        study.search);
  }

  if (study.n > 0 && study.replicates > 0) {
    for (const auto& [name, method] :
         {std::pair{"ignoring", gcmp::FitMethod::Ignoring},
          std::pair{"correct", gcmp::FitMethod::Correct}}) {
      const gcmp::StudyResult r = gcmp::run_study(
          model, method, study.theta_true, study.psi_true,
          study.theta_template, study.n, study.replicates, study.seed,
          study.search);
      json m;
      m["mean"] = r.mean;
      m["sd"] = r.sd;
      m["se_mean"] = r.se_mean;
      m["bias"] = r.bias;
      m["estimates"] = r.estimates;
      report["sample"][name] = std::move(m);
    }
  } else {
    report["sample"] = json::object();
  }
  report["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start)
          .count();
  emit(report, c);
  return kOk;
}

int cmd_list_scenarios(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  json list = json::array();
  for (const auto& s : gcmp::catalog()) {
    json e;
    e["name"] = s.name;
    e["provenance"] = s.provenance;
    json exp;
    for (const auto& [k, v] : s.expected) exp[k] = gcmp::to_string(v);
    e["expected"] = std::move(exp);
    e["expect_predictable"] = s.expect_predictable;
    list.push_back(std::move(e));
  }
  json report = base_report(c, start);
  report["scenarios"] = std::move(list);
  emit(report, c);
  return kOk;
}

int cmd_verify_example(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  json results = json::array();
  bool any_mismatch = false;
  for (const auto& s : gcmp::catalog()) {
    if (!c.scenario.empty() && s.name != c.scenario) continue;
    const auto mismatches = gcmp::verify_expectations(s);
    json e;
    e["name"] = s.name;
    e["mismatches"] = mismatches;
    any_mismatch = any_mismatch || !mismatches.empty();
    results.push_back(std::move(e));
  }
  if (!c.scenario.empty() && results.empty())
    throw std::invalid_argument("unknown scenario: " + c.scenario);
  json report = base_report(c, start);
  report["verified"] = std::move(results);
  report["wall_clock_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start)
          .count();
  emit(report, c);
  return any_mismatch ? kVerifyFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  if (const char* env_cap = std::getenv("GCMP_PATH_CAP"))
    config.cap = static_cast<std::size_t>(std::strtoull(env_cap, nullptr, 10));

  CLI::App app{"Exact certification and estimation for incompletely observed "
               "finite processes"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--input", config.input, "Model/scenario file (JSON)");
    sub->add_option("--output", config.output,
                    "Report path (default: stdout)");
    sub->add_option("--seed", config.seed, "RNG seed");
    sub->add_option("--cap", config.cap,
                    "Path-count cap (env GCMP_PATH_CAP sets the default)");
    sub->add_option("--tol", config.tol, "Derived-quantity tolerance");
    sub->add_option("--scenario", config.scenario, "Catalog scenario name");
    sub->add_option("--n", config.n, "Sample size / battery model count");
    sub->add_option("--replicates", config.replicates, "Replicate count");
  };
  for (const char* name :
       {"certify", "battery", "estimate", "list-scenarios", "verify-example"})
    add_common(app.add_subcommand(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParseError;
  }

  gcmp::derived_tol() = config.tol;
  config.command = app.get_subcommands().front()->get_name();

  try {
    if (config.command == "certify") return cmd_certify(config);
    if (config.command == "battery") return cmd_battery(config);
    if (config.command == "estimate") return cmd_estimate(config);
    if (config.command == "list-scenarios") return cmd_list_scenarios(config);
    return cmd_verify_example(config);
  } catch (const gcmp::ParseError& e) {
    std::cerr << "parse error";
    if (e.line > 0) std::cerr << " at line " << e.line << ", column "
                              << e.column;
    std::cerr << ": " << e.what() << "\n";
    return kParseError;
  } catch (const std::exception& e) {
    const std::string what = e.what();
    std::cerr << "error: " << what << "\n";
    if (what == "path cap exceeded") return kCapExceeded;
    if (what == "observation off support" || what == "r off support")
      return kOffSupport;
    if (what.rfind("unknown scenario", 0) == 0) return kParseError;
    return kInternal;
  }
}
