#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace gcmp {

// Tolerances: direct sums of path probabilities are short products, so the
// error budget is tiny; derived quantities (ratios of sums) get a looser bound.
inline constexpr double kSumTol = 1e-12;
inline constexpr double kDerivedTol = 1e-9;

// Runtime override for the derived tolerance (CLI --tol); tests leave it at
// the pinned default.
inline double& derived_tol() {
  static double tol = kDerivedTol;
  return tol;
}

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

inline bool nearly_equal(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

}  // namespace gcmp
