#pragma once

// Penalized successive convex approximation.
//
// intra_solve alternates the KKT solve of P2 with the tight auxiliary update
// (a majorization-minimization loop) for a frozen penalty anchor. inter_solve
// re-anchors the penalty linearization at each sub-problem's solution until
// the iterates stop moving, then rounds to a binary, integer-step allocation.

#include <string>
#include <vector>

#include "diffstep/kkt.hpp"
#include "diffstep/model.hpp"
#include "diffstep/surrogate.hpp"

namespace diffstep {

struct TraceEntry {
  int outer = 0;
  int inner = 0;
  double p2 = 0.0;  // G - tau H at the iterate with its tight auxiliaries
  double p1 = 0.0;
  double max_da = 0.0;
  double max_ds = 0.0;
};

struct ComponentTotals {
  double time_total = 0.0;    // s
  double error_mean = 0.0;
  double accuracy = 0.0;      // 1 - error_mean
  double energy_total = 0.0;  // J
  double utility_total = 0.0;
};

enum class SolveStatus { kConverged, kMaxIterations, kError };

const char* to_string(SolveStatus status);

struct IntraResult {
  Allocation alloc;
  Multipliers multipliers;
  std::vector<TraceEntry> trace;
  int iterations = 0;
  bool converged = false;
};

struct SolveReport {
  Allocation allocation_relaxed;
  Allocation allocation_binary;
  Multipliers multipliers;
  double objective_relaxed = 0.0;
  double objective_binary = 0.0;
  ComponentTotals components;  // of allocation_binary
  std::vector<TraceEntry> trace;
  int outer_iterations = 0;
  int inner_iterations = 0;  // summed over all outer iterations
  SolveStatus status = SolveStatus::kConverged;
  std::string error;  // set when status == kError
};

/// MM iterations on P2 for the frozen `anchor`.
IntraResult intra_solve(const Model& model, const Allocation& initial, const PenaltyAnchor& anchor,
                        int outer_index = 0);

/// Outer penalty loop from `initial`, followed by round_and_repair.
SolveReport inter_solve(const Model& model, const Allocation& initial);

/// inter_solve from the configured start (plus seeded random restarts when
/// init.starts > 1); keeps the report with the lowest binary objective.
SolveReport inter_solve(const Model& model);

Allocation default_initial_allocation(const Model& model);

/// Thresholds a at 0.5, re-optimizes s per branch, projects the offloaded
/// steps onto the edge budget and rounds to integers.
Allocation round_and_repair(const Model& model, const Allocation& relaxed);

/// Rounds s to the nearest integer within floor(cap), then lowers the
/// largest offloaded entries (lower index first on ties) one step at a time
/// until sum_{a_n = 1} s_n <= S_e^max. `a` must be binary.
void round_steps_to_budget(const Model& model, Allocation& alloc);

ComponentTotals objective_breakdown(const Model& model, const Allocation& alloc);

/// max_n min(a_n, 1 - a_n).
double binary_gap(const Allocation& alloc);

}  // namespace diffstep
