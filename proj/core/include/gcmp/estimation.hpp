#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gcmp/model.hpp"
#include "gcmp/rng.hpp"

namespace gcmp {

struct Dataset {
  std::vector<Observation> rows;
};

// Sequential sampling at arbitrary parameter values: the full x-path first
// (x_t from the process kernel given its history), then the r-masks in time
// order from the mechanism kernel. Row i uses Xoshiro256::stream(seed, i).
Dataset simulate(const JointModel& model, const ParamVec& theta,
                 const ParamVec& psi, int n, std::uint64_t seed);

// Long-format delimited text: one line per (row, time), missing values
// rendered as NA.
void export_dataset(const Dataset& data, const JointModel& model,
                    std::ostream& out);

enum class FitMethod {
  Ignoring,  // likelihood of the observed coordinates, mechanism dropped
  Correct    // full observed-data likelihood, psi fixed at its true value
};

// One-dimensional search over theta[component] with the remaining
// coordinates frozen at theta_template.
struct SearchSpec {
  double lo = 0.05;
  double hi = 0.95;
  int coarse_points = 41;
  double tol = 1e-4;
  int component = 0;
};

struct FitResult {
  double theta_hat = 0.0;
  double loglik = 0.0;
};

FitResult fit_mle(const JointModel& model, const Dataset& data,
                  FitMethod method, const ParamVec& theta_template,
                  const ParamVec& psi_true, const SearchSpec& spec = {});

// Maximizer of the expected per-observation log likelihood under the true
// parameters (the n -> infinity target of fit_mle).
double population_argmax(const JointModel& model, FitMethod method,
                         const ParamVec& theta_true, const ParamVec& psi_true,
                         const ParamVec& theta_template,
                         const SearchSpec& spec = {});

struct StudyResult {
  std::vector<double> estimates;
  double mean = 0.0;
  double sd = 0.0;        // across replicates
  double se_mean = 0.0;   // sd / sqrt(replicates)
  double bias = 0.0;      // mean - theta_true[component]
};

StudyResult run_study(const JointModel& model, FitMethod method,
                      const ParamVec& theta_true, const ParamVec& psi_true,
                      const ParamVec& theta_template, int n, int replicates,
                      std::uint64_t base_seed, const SearchSpec& spec = {});

}  // namespace gcmp
