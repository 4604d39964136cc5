#include "diffstep/kkt.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "diffstep/bisect.hpp"

namespace diffstep {

namespace {

// interior probes used to confirm dL/ds changes sign exactly once
constexpr int kSafeguardPoints = 8;
constexpr int kMaxDoublings = 60;

}  // namespace

const char* to_string(SolverErrorCode code) {
  switch (code) {
    case SolverErrorCode::kNonBracketing: return "non_bracketing";
    case SolverErrorCode::kBracketFailure: return "bracket_failure";
    case SolverErrorCode::kInfeasibleBudget: return "infeasible_budget";
    case SolverErrorCode::kNonFinite: return "non_finite";
  }
  return "unknown";
}

KktSolver::KktSolver(const Model& model, const AuxiliaryState& aux, const PenaltyAnchor& anchor)
    : model_(model),
      aux_(aux),
      anchor_(anchor),
      tol_(model.config().tolerances.bisection),
      max_iter_(model.config().tolerances.bisection_max_iter) {
  if (aux.u.size() != model.size() || aux.v.size() != model.size() ||
      aux.z.size() != model.size() || anchor.a_prev.size() != model.size()) {
    throw std::invalid_argument("KktSolver: auxiliary/anchor size does not match N");
  }
}

double KktSolver::stationarity_a_slope(std::size_t n, double delta) const {
  return 1.0 / (2.0 * aux_.u[n]) + 1.0 / (2.0 * aux_.v[n]) + delta / (2.0 * aux_.z[n]);
}

double KktSolver::stationarity_a(std::size_t n, double a, double zeta, double delta) const {
  const auto& ue = model_.ue(n);
  const double tau = model_.config().tau_penalty;
  return stationarity_a_slope(n, delta) * a - 1.0 / (2.0 * aux_.u[n]) -
         tau * (2.0 * anchor_.a_prev[n] - 1.0) + zeta * (ue.s_cap_local - ue.s_cap_edge);
}

double KktSolver::a_hat(std::size_t n, double zeta, double delta) const {
  const auto& ue = model_.ue(n);
  const double tau = model_.config().tau_penalty;
  const double num = 1.0 / (2.0 * aux_.u[n]) + tau * (2.0 * anchor_.a_prev[n] - 1.0) -
                     zeta * (ue.s_cap_local - ue.s_cap_edge);
  return num / stationarity_a_slope(n, delta);
}

double KktSolver::a_tilde(std::size_t n, double zeta, double delta) const {
  return std::clamp(a_hat(n, zeta, delta), 0.0, 1.0);
}

double KktSolver::stationarity_s(std::size_t n, double s, double zeta, double delta) const {
  const double r0 = model_.net_cost(n, s, Mode::kLocal);
  const double r1 = model_.net_cost(n, s, Mode::kEdge);
  const double d0 = model_.net_cost_derivative(n, s, Mode::kLocal);
  const double d1 = model_.net_cost_derivative(n, s, Mode::kEdge);
  return 2.0 * r0 * d0 * aux_.u[n] + 2.0 * r1 * d1 * aux_.v[n] + 2.0 * delta * s * aux_.z[n] + zeta;
}

double KktSolver::s_tilde(std::size_t n, double zeta, double delta) const {
  const auto phi = [&](double s) {
    const double v = stationarity_s(n, s, zeta, delta);
    if (!std::isfinite(v)) {
      throw SolverError(SolverErrorCode::kNonFinite,
                        fmt::format("dL/ds_{} is not finite at s = {}", n, s));
    }
    return v;
  };
  const double upper = model_.step_upper(n);
  const double phi_lo = phi(0.0);
  if (phi_lo >= 0.0) return 0.0;
  const double phi_hi = phi(upper);
  if (phi_hi <= 0.0) return upper;

  int sign_changes = 0;
  bool negative = true;
  for (int k = 1; k <= kSafeguardPoints; ++k) {
    const bool neg = phi(upper * k / (kSafeguardPoints + 1)) < 0.0;
    sign_changes += neg != negative;
    negative = neg;
  }
  sign_changes += negative;  // phi(upper) > 0
  if (sign_changes > 1) {
    throw SolverError(SolverErrorCode::kNonBracketing,
                      fmt::format("dL/ds_{} changes sign {} times on [0, {}]", n, sign_changes, upper));
  }

  // Bisect until the bracket collapses instead of stopping at the residual
  // tolerance: with u or v near the aux ceiling phi is steep, and a root that
  // is only tol-accurate perturbs P2 enough to break inner descent.
  const auto r = bisect(
      phi, 0.0, upper, [](double v) { return v < 0.0; }, [](double v) { return v == 0.0; },
      std::max(max_iter_, 1100));
  if (r.lo == r.hi) return r.lo;
  return std::abs(phi(r.lo)) <= std::abs(phi(r.hi)) ? r.lo : r.hi;
}

double KktSolver::cap_residual(std::size_t n, double zeta, double delta) const {
  return s_tilde(n, zeta, delta) - model_.step_cap(n, a_tilde(n, zeta, delta));
}

double KktSolver::zeta_hat(std::size_t n, double delta) const {
  if (cap_residual(n, 0.0, delta) <= 0.0) return 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (cap_residual(n, hi, delta) > 0.0) {
    if (++doublings > kMaxDoublings) {
      throw SolverError(SolverErrorCode::kBracketFailure,
                        fmt::format("no zeta bracket for UE {} at delta = {}", n, delta));
    }
    hi *= 2.0;
  }
  const double lo = doublings == 0 ? 0.0 : 0.5 * hi;
  // stop on |zeta * I_n| rather than |I_n| so complementary slackness holds
  // to the same tolerance when zeta is large
  double zeta = hi;
  const auto r = bisect(
      [&](double z) { return cap_residual(n, zeta = z, delta); }, lo, hi,
      [](double v) { return v > 0.0; },
      [&](double v) { return std::abs(v) * (1.0 + zeta) <= tol_; }, max_iter_);
  return std::max(r.hi, 0.0);
}

double KktSolver::budget_residual(double delta) const {
  double mass = 0.0;
  for (std::size_t n = 0; n < model_.size(); ++n) {
    const double zeta = zeta_hat(n, delta);
    const double a = a_tilde(n, zeta, delta);
    const double s = s_tilde(n, zeta, delta);
    mass += s * s * aux_.z[n] + a * a / (4.0 * aux_.z[n]);
  }
  return mass - model_.config().s_edge_budget;
}

double KktSolver::delta_star() const {
  if (budget_residual(0.0) <= 0.0) return 0.0;
  double hi = 1.0;
  int doublings = 0;
  double phi_hi = budget_residual(hi);
  while (phi_hi > tol_) {
    if (++doublings > kMaxDoublings) {
      throw SolverError(SolverErrorCode::kInfeasibleBudget,
                        fmt::format("surrogate budget still exceeded by {} at delta = {}; "
                                    "S_e^max = {} is unreachable with the current auxiliaries",
                                    phi_hi, hi, model_.config().s_edge_budget));
    }
    hi *= 2.0;
    phi_hi = budget_residual(hi);
  }
  if (phi_hi <= 0.0 && std::abs(phi_hi) <= tol_) return hi;
  const double lo = doublings == 0 ? 0.0 : 0.5 * hi;
  double delta = hi;
  const auto r = bisect([&](double d) { return budget_residual(delta = d); }, lo, hi,
                        [](double v) { return v > 0.0; },
                        [&](double v) { return std::abs(v) * (1.0 + delta) <= tol_; }, max_iter_);
  return r.hi;
}

KktSolution KktSolver::solve() const {
  const std::size_t N = model_.size();
  KktSolution out;
  out.alloc.a.resize(N);
  out.alloc.s.resize(N);
  auto& m = out.multipliers;
  m.beta.resize(N);
  m.gamma.resize(N);
  m.zeta.resize(N);
  m.delta = delta_star();
  for (std::size_t n = 0; n < N; ++n) {
    const double zeta = zeta_hat(n, m.delta);
    m.zeta[n] = zeta;
    out.alloc.a[n] = a_tilde(n, zeta, m.delta);
    out.alloc.s[n] = s_tilde(n, zeta, m.delta);
    m.beta[n] = std::max(stationarity_a(n, 0.0, zeta, m.delta), 0.0);
    m.gamma[n] = -std::min(stationarity_a(n, 1.0, zeta, m.delta), 0.0);
  }
  return out;
}

KktSolution solve_kkt(const Model& model, const AuxiliaryState& aux, const PenaltyAnchor& anchor) {
  return KktSolver(model, aux, anchor).solve();
}

}  // namespace diffstep
