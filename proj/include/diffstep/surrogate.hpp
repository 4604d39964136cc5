#pragma once

// Decoupled surrogate of P1 and the linearized binary penalty (problem P2).
//
// For fixed auxiliaries (u, v, z) > 0:
//   g_n = R0(s)^2 u + (1-a)^2 / (4u) + R1(s)^2 v + a^2 / (4v)  >=  (1-a) R0 + a R1
//   s^2 z + a^2 / (4z)                                        >=  a s
// with equality at u = (1-a)/(2 R0), v = a/(2 R1), z = a/(2s).

#include <span>
#include <vector>

#include "diffstep/model.hpp"

namespace diffstep {

struct AuxiliaryState {
  std::vector<double> u;
  std::vector<double> v;
  std::vector<double> z;

  std::size_t size() const { return u.size(); }
};

/// Expansion point a^(i) of the penalty linearization.
struct PenaltyAnchor {
  std::vector<double> a_prev;
};

/// Tight auxiliaries at `alloc`. Every entry is clamped to
/// [aux_floor, 1 / aux_floor]; z is unbounded at s = 0 otherwise.
AuxiliaryState update_auxiliaries(const Model& model, const Allocation& alloc);

/// Per-UE term g_n(a_n, s_n | u_n, v_n).
double surrogate_term(const Model& model, std::size_t n, double a, double s, double u, double v);

/// G(a, s | u, v).
double surrogate_objective(const Model& model, const Allocation& alloc, const AuxiliaryState& aux);

/// sum_n (s_n^2 z_n + a_n^2 / (4 z_n)).
double surrogate_edge_mass(const Allocation& alloc, std::span<const double> z);

/// surrogate_edge_mass - S_e^max; <= 0 means the surrogate budget holds.
double surrogate_edge_constraint(const Model& model, const Allocation& alloc,
                                 const AuxiliaryState& aux);

/// H(a | a^(i)) = sum_n a_i (a_i - 1) + (2 a_i - 1)(a_n - a_i).
double penalty_linearized(std::span<const double> a, const PenaltyAnchor& anchor);

/// G - tau * H.
double penalized_surrogate(const Model& model, const Allocation& alloc, const AuxiliaryState& aux,
                           const PenaltyAnchor& anchor);

}  // namespace diffstep
