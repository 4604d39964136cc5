#pragma once

// KKT solution of one convex sub-problem P2 (fixed auxiliaries and anchor).
//
// Lagrangian multipliers: beta_n (a_n >= 0), gamma_n (a_n <= 1), zeta_n (per-UE
// step cap) and delta (surrogate edge budget). For given (zeta_n, delta):
//   a_hat   closes dL/da_n = 0 (affine in a_n),
//   s_tilde is the root of the monotone dL/ds_n on [0, max(S0, S1)],
//   zeta_hat bisects the cap residual I_n(zeta, delta) = 0,
// and delta_star bisects the surrogate budget residual Phi(delta) = 0.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffstep/model.hpp"
#include "diffstep/surrogate.hpp"

namespace diffstep {

enum class SolverErrorCode {
  kNonBracketing,     // dL/ds changes sign more than once
  kBracketFailure,    // zeta upper bracket not found
  kInfeasibleBudget,  // delta upper bracket not found
  kNonFinite,
};

const char* to_string(SolverErrorCode code);

class SolverError : public std::runtime_error {
 public:
  SolverError(SolverErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  SolverErrorCode code() const { return code_; }

 private:
  SolverErrorCode code_;
};

struct Multipliers {
  std::vector<double> beta;
  std::vector<double> gamma;
  std::vector<double> zeta;
  double delta = 0.0;
};

struct KktSolution {
  Allocation alloc;
  Multipliers multipliers;
};

class KktSolver {
 public:
  /// Keeps references; `model`, `aux` and `anchor` must outlive the solver.
  KktSolver(const Model& model, const AuxiliaryState& aux, const PenaltyAnchor& anchor);
  KktSolver(const Model&, AuxiliaryState&&, const PenaltyAnchor&) = delete;
  KktSolver(const Model&, const AuxiliaryState&, PenaltyAnchor&&) = delete;
  KktSolver(const Model&, AuxiliaryState&&, PenaltyAnchor&&) = delete;
  KktSolver(Model&&, const AuxiliaryState&, const PenaltyAnchor&) = delete;

  /// D_n(a, zeta, delta) = dL/da_n without the box multipliers.
  double stationarity_a(std::size_t n, double a, double zeta, double delta) const;
  /// Coefficient of a in D_n; strictly positive.
  double stationarity_a_slope(std::size_t n, double delta) const;
  /// Root of D_n in a, unclamped.
  double a_hat(std::size_t n, double zeta, double delta) const;
  /// a_hat clamped to [0, 1].
  double a_tilde(std::size_t n, double zeta, double delta) const;

  /// phi(s) = dG/ds_n + 2 delta s z_n + zeta.
  double stationarity_s(std::size_t n, double s, double zeta, double delta) const;
  double s_tilde(std::size_t n, double zeta, double delta) const;

  /// I_n(zeta, delta) = s_tilde - (1 - a_tilde) S0 - a_tilde S1.
  double cap_residual(std::size_t n, double zeta, double delta) const;
  double zeta_hat(std::size_t n, double delta) const;

  /// Phi(delta) with zeta_n = zeta_hat(n, delta) for every n.
  double budget_residual(double delta) const;
  double delta_star() const;

  KktSolution solve() const;

 private:
  const Model& model_;
  const AuxiliaryState& aux_;
  const PenaltyAnchor& anchor_;
  double tol_;
  int max_iter_;
};

KktSolution solve_kkt(const Model& model, const AuxiliaryState& aux, const PenaltyAnchor& anchor);

}  // namespace diffstep
