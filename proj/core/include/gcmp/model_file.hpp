#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "gcmp/estimation.hpp"
#include "gcmp/model.hpp"

namespace gcmp {

// Thrown with 1-based text coordinates when the file is not valid JSON or
// violates the schema (schema violations report line 0).
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line_, int column_)
      : std::runtime_error(msg), line(line_), column(column_) {}
  int line = 0;
  int column = 0;
};

struct StudySpec {
  int n = 0;
  int replicates = 0;
  std::uint64_t seed = 0;
  ParamVec theta_true;
  ParamVec psi_true;
  ParamVec theta_template;  // defaults to theta_true
  SearchSpec search;
};

struct LoadedModel {
  JointModel model;
  std::string label;
  std::string scenario_name;  // nonempty when the file names a scenario
  std::optional<VerticalCoarsener> coarsener;
  std::optional<StudySpec> study;
};

// Declarative model/scenario file. Two forms:
//   {"scenario": "<catalog name>", "study": {...}}
//   {"model": {...}, "study": {...}}
// All probability values are decimal strings. Schema documented in the
// repository README.
LoadedModel load_model_file(const std::string& path,
                            std::size_t path_cap = 100000);
LoadedModel parse_model_text(const std::string& text,
                             std::size_t path_cap = 100000);

}  // namespace gcmp
