#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcmp/certify.hpp"
#include "gcmp/model.hpp"

namespace gcmp {

// A ready-to-build observation scheme with its expected certificate verdicts
// (re-verified on every run, never trusted).
struct Scenario {
  std::string name;
  std::string provenance;  // which observation scheme this realizes
  std::function<JointModel()> build;
  std::map<std::string, Verdict> expected;
  CountingConvention convention = CountingConvention::Visits;
  // >= 0: this X-component is a 0-1 counting process under right-censoring,
  // so the independent-censoring certificate applies.
  int survival_component = -1;
  bool expect_predictable = false;
  // Set for vertically coarsened scenarios: the coarsener and the name of
  // the uncoarsened parent.
  std::optional<VerticalCoarsener> coarsener;
  std::string parent;
};

const std::vector<Scenario>& catalog();
const Scenario& find_scenario(const std::string& name);

// Canonical two-step desk models used across the test fixtures.
JointModel make_m1_ignorable();
JointModel make_m1_anticipating();

// Runs every certificate relevant to the scenario and compares against the
// declared expectations; returns mismatch descriptions (empty = all match).
std::vector<std::string> verify_expectations(const Scenario& scenario);

}  // namespace gcmp
