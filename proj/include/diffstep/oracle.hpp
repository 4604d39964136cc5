#pragma once

// Exhaustive reference solver for small N.
//
// Enumerates every binary offloading vector and, for each, minimizes the P1
// objective over a step grid {0, h, 2h, ...}. Shares only the cost evaluation
// with the model; none of the continuous minimization machinery.

#include <cstdint>
#include <span>
#include <vector>

#include "diffstep/model.hpp"

namespace diffstep {

inline constexpr std::size_t kOracleMaxUes = 20;
inline constexpr double kOracleMaxProductGrid = 1e6;

struct OracleResult {
  std::vector<int> best_a;
  std::vector<double> best_s;
  double best_objective = 0.0;
  std::uint64_t assignments_evaluated = 0;
};

struct FixedAssignmentResult {
  std::vector<double> s;
  double objective = 0.0;
  bool exhaustive = true;  // false when the dual path handled the offloaded set
};

/// Best grid steps for a fixed binary assignment.
FixedAssignmentResult inner_fixed_assignment(const Model& model, std::span<const int> a,
                                             double grid_step);

/// Minimum over all 2^N assignments; ties go to fewer offloads, then the
/// lexicographically smaller a. Throws std::invalid_argument for N > 20.
OracleResult brute_force(const Model& model, double grid_step = 1.0);

}  // namespace diffstep
