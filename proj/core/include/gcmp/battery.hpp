#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gcmp/certify.hpp"
#include "gcmp/model.hpp"
#include "gcmp/rng.hpp"

namespace gcmp {

// Random binary-X model with horizon 2 or 3, a Markov process kernel and a
// mechanism drawn from one of the three dependence classes. All kernel
// probabilities stay inside (0,1), so the support is always the full space
// and identical across the parameter grid.
JointModel random_model(Xoshiro256& rng, std::size_t path_cap = 100000);

struct RandomBatteryReport {
  int requested = 0;
  int evaluated = 0;
  int skipped_cap = 0;  // refused by the path cap; counted, never dropped
  // (model index, violated arrows) for each model with violations.
  std::vector<std::pair<int, std::vector<std::string>>> violations;
};

// Mutation hook applied to each BatteryResult before arrow checking; tests
// inject a deliberately broken certificate to confirm violations surface.
using BatteryHook = std::function<void(BatteryResult&)>;

RandomBatteryReport run_random_battery(std::uint64_t seed, int n,
                                       std::size_t path_cap = 100000,
                                       const BatteryHook& hook = {});

}  // namespace gcmp
