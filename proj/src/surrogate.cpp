#include "diffstep/surrogate.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace diffstep {

namespace {

double clamp_aux(double x, double floor) {
  return std::clamp(x, floor, 1.0 / floor);
}

double positive_cost(const Model& model, std::size_t n, double s, Mode mode) {
  const double r = model.net_cost(n, s, mode);
  if (r > 0.0) return r;
  if (model.config().allow_nonpositive_cost) return kCostFloor;
  throw std::domain_error(fmt::format(
      "R_{{{},{}}}({}) = {} is not positive; auxiliary variables are undefined", n,
      static_cast<int>(mode), s, r));
}

}  // namespace

AuxiliaryState update_auxiliaries(const Model& model, const Allocation& alloc) {
  const std::size_t N = model.size();
  if (alloc.size() != N || alloc.s.size() != N) {
    throw std::invalid_argument("update_auxiliaries: allocation size mismatch");
  }
  const double floor = model.config().tolerances.aux_floor;
  AuxiliaryState aux;
  aux.u.resize(N);
  aux.v.resize(N);
  aux.z.resize(N);
  for (std::size_t n = 0; n < N; ++n) {
    const double a = alloc.a[n];
    const double s = alloc.s[n];
    const double r0 = positive_cost(model, n, s, Mode::kLocal);
    const double r1 = positive_cost(model, n, s, Mode::kEdge);
    aux.u[n] = clamp_aux((1.0 - a) / (2.0 * r0), floor);
    aux.v[n] = clamp_aux(a / (2.0 * r1), floor);
    aux.z[n] = s > 0.0 ? clamp_aux(a / (2.0 * s), floor) : (a > 0.0 ? 1.0 / floor : floor);
  }
  return aux;
}

double surrogate_term(const Model& model, std::size_t n, double a, double s, double u, double v) {
  const double r0 = model.net_cost(n, s, Mode::kLocal);
  const double r1 = model.net_cost(n, s, Mode::kEdge);
  return r0 * r0 * u + (1.0 - a) * (1.0 - a) / (4.0 * u) + r1 * r1 * v + a * a / (4.0 * v);
}

double surrogate_objective(const Model& model, const Allocation& alloc, const AuxiliaryState& aux) {
  double g = 0.0;
  for (std::size_t n = 0; n < model.size(); ++n) {
    g += surrogate_term(model, n, alloc.a[n], alloc.s[n], aux.u[n], aux.v[n]);
  }
  return g;
}

double surrogate_edge_mass(const Allocation& alloc, std::span<const double> z) {
  double mass = 0.0;
  for (std::size_t n = 0; n < alloc.size(); ++n) {
    const double a = alloc.a[n];
    const double s = alloc.s[n];
    mass += s * s * z[n] + a * a / (4.0 * z[n]);
  }
  return mass;
}

double surrogate_edge_constraint(const Model& model, const Allocation& alloc,
                                 const AuxiliaryState& aux) {
  return surrogate_edge_mass(alloc, aux.z) - model.config().s_edge_budget;
}

double penalty_linearized(std::span<const double> a, const PenaltyAnchor& anchor) {
  if (a.size() != anchor.a_prev.size()) {
    throw std::invalid_argument("penalty_linearized: anchor size mismatch");
  }
  double h = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const double p = anchor.a_prev[n];
    h += p * (p - 1.0) + (2.0 * p - 1.0) * (a[n] - p);
  }
  return h;
}

double penalized_surrogate(const Model& model, const Allocation& alloc, const AuxiliaryState& aux,
                           const PenaltyAnchor& anchor) {
  return surrogate_objective(model, alloc, aux) -
         model.config().tau_penalty * penalty_linearized(alloc.a, anchor);
}

}  // namespace diffstep
