#include "diffstep/sca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "diffstep/bisect.hpp"
#include "diffstep/random.hpp"

namespace diffstep {

namespace {

struct Change {
  double max_da = 0.0;
  double max_ds = 0.0;
  double scaled = 0.0;  // max over |da| and |ds| / s_upper
};

Change change_between(const Model& model, const Allocation& from, const Allocation& to) {
  Change c;
  for (std::size_t n = 0; n < model.size(); ++n) {
    const double da = std::abs(to.a[n] - from.a[n]);
    const double ds = std::abs(to.s[n] - from.s[n]);
    c.max_da = std::max(c.max_da, da);
    c.max_ds = std::max(c.max_ds, ds);
    c.scaled = std::max({c.scaled, da, ds / model.step_upper(n)});
  }
  return c;
}

// argmin of a convex function on [lo, hi] given its (monotone) derivative
template <class Deriv>
double minimize_convex(Deriv&& deriv, double lo, double hi) {
  if (deriv(lo) >= 0.0) return lo;
  if (deriv(hi) <= 0.0) return hi;
  const auto r = bisect(
      deriv, lo, hi, [](double v) { return v < 0.0; }, [](double v) { return v == 0.0; }, 200);
  return r.lo + 0.5 * (r.hi - r.lo);
}

// s_n(lambda) = argmin R_{n,1}(s) + lambda s on [0, S1]
double edge_steps_at_price(const Model& model, std::size_t n, double lambda) {
  return minimize_convex(
      [&](double s) { return model.net_cost_derivative(n, s, Mode::kEdge) + lambda; }, 0.0,
      std::min(model.step_cap(n, 1.0), model.step_upper(n)));
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxIterations: return "max_iterations";
    case SolveStatus::kError: return "error";
  }
  return "?";
}

IntraResult intra_solve(const Model& model, const Allocation& initial, const PenaltyAnchor& anchor,
                        int outer_index) {
  const auto& tol = model.config().tolerances;
  IntraResult out;
  out.alloc = initial;
  AuxiliaryState aux = update_auxiliaries(model, out.alloc);
  double prev = penalized_surrogate(model, out.alloc, aux, anchor);

  for (int k = 1; k <= tol.max_inner; ++k) {
    KktSolution sol = solve_kkt(model, aux, anchor);
    const Change c = change_between(model, out.alloc, sol.alloc);
    out.alloc = std::move(sol.alloc);
    out.multipliers = std::move(sol.multipliers);
    aux = update_auxiliaries(model, out.alloc);
    const double p2 = penalized_surrogate(model, out.alloc, aux, anchor);
    const double p1 = model.objective(out.alloc);
    if (!std::isfinite(p2) || !std::isfinite(p1)) {
      throw SolverError(SolverErrorCode::kNonFinite,
                        fmt::format("non-finite objective at outer {} inner {}: P2 = {}, P1 = {}",
                                    outer_index, k, p2, p1));
    }
    out.trace.push_back({outer_index, k, p2, p1, c.max_da, c.max_ds});
    out.iterations = k;
    const bool still = c.max_da == 0.0 && c.max_ds == 0.0;
    if (still || std::abs(p2 - prev) <= tol.inner * (1.0 + std::abs(prev))) {
      out.converged = true;
      break;
    }
    prev = p2;
  }
  return out;
}

SolveReport inter_solve(const Model& model, const Allocation& initial) {
  const auto& tol = model.config().tolerances;
  SolveReport report;
  report.status = SolveStatus::kMaxIterations;
  Allocation current = initial;
  try {
    for (int i = 1; i <= tol.max_outer; ++i) {
      const PenaltyAnchor anchor{current.a};
      IntraResult intra = intra_solve(model, current, anchor, i);
      report.trace.insert(report.trace.end(), intra.trace.begin(), intra.trace.end());
      report.inner_iterations += intra.iterations;
      report.outer_iterations = i;
      const double moved = change_between(model, current, intra.alloc).scaled;
      current = std::move(intra.alloc);
      report.multipliers = std::move(intra.multipliers);
      if (moved <= tol.outer) {
        report.status = SolveStatus::kConverged;
        break;
      }
    }
  } catch (const SolverError& e) {
    report.status = SolveStatus::kError;
    report.error = fmt::format("{}: {}", to_string(e.code()), e.what());
  }
  report.allocation_relaxed = current;
  report.objective_relaxed = model.objective(current);
  report.allocation_binary = round_and_repair(model, current);
  report.objective_binary = model.objective(report.allocation_binary);
  report.components = objective_breakdown(model, report.allocation_binary);
  return report;
}

Allocation default_initial_allocation(const Model& model) {
  const auto& init = model.config().init;
  Allocation x;
  x.a.assign(model.size(), init.a0);
  x.s.resize(model.size());
  for (std::size_t n = 0; n < model.size(); ++n) {
    const auto& ue = model.ue(n);
    const double s = init.s0 ? *init.s0 : 0.5 * std::min(ue.s_cap_local, ue.s_cap_edge);
    x.s[n] = std::min(s, model.step_cap(n, init.a0));
  }
  return x;
}

SolveReport inter_solve(const Model& model) {
  SolveReport best = inter_solve(model, default_initial_allocation(model));
  const int starts = model.config().init.starts;
  if (starts <= 1) return best;
  Rng rng(model.config().seed);
  for (int k = 1; k < starts; ++k) {
    Allocation x;
    x.a.resize(model.size());
    x.s.resize(model.size());
    for (std::size_t n = 0; n < model.size(); ++n) {
      x.a[n] = rng.uniform(0.05, 0.95);
      x.s[n] = rng.uniform(0.0, model.step_cap(n, x.a[n]));
    }
    SolveReport r = inter_solve(model, x);
    const int outer = best.outer_iterations + r.outer_iterations;
    const int inner = best.inner_iterations + r.inner_iterations;
    if (r.objective_binary < best.objective_binary) best = std::move(r);
    best.outer_iterations = outer;
    best.inner_iterations = inner;
  }
  return best;
}

void round_steps_to_budget(const Model& model, Allocation& alloc) {
  const std::size_t N = model.size();
  double used = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    const double cap = std::floor(model.step_cap(n, alloc.a[n]));
    alloc.s[n] = std::clamp(std::round(alloc.s[n]), 0.0, cap);
    if (alloc.a[n] == 1.0) used += alloc.s[n];
  }
  const double budget = model.config().s_edge_budget;
  while (used > budget) {
    std::size_t pick = N;
    for (std::size_t n = 0; n < N; ++n) {
      if (alloc.a[n] != 1.0 || alloc.s[n] <= 0.0) continue;
      if (pick == N || alloc.s[n] > alloc.s[pick]) pick = n;
    }
    if (pick == N) break;
    alloc.s[pick] -= 1.0;
    used -= 1.0;
  }
}

Allocation round_and_repair(const Model& model, const Allocation& relaxed) {
  const std::size_t N = model.size();
  Allocation x;
  x.a.resize(N);
  x.s.resize(N);
  std::vector<std::size_t> offloaded;
  double edge_steps = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    x.a[n] = relaxed.a[n] >= 0.5 ? 1.0 : 0.0;
    const Mode mode = x.a[n] == 1.0 ? Mode::kEdge : Mode::kLocal;
    x.s[n] = minimize_convex([&](double s) { return model.net_cost_derivative(n, s, mode); }, 0.0,
                             model.step_cap(n, x.a[n]));
    if (mode == Mode::kEdge) {
      offloaded.push_back(n);
      edge_steps += x.s[n];
    }
  }

  const double budget = model.config().s_edge_budget;
  if (edge_steps > budget) {
    const auto load = [&](double lambda) {
      double total = 0.0;
      for (std::size_t n : offloaded) total += edge_steps_at_price(model, n, lambda);
      return total;
    };
    double hi = 0.0;
    for (std::size_t n : offloaded) {
      hi = std::max(hi, -model.net_cost_derivative(n, 0.0, Mode::kEdge));
    }
    const double tol = 1e-9 * (1.0 + budget);
    const auto r = bisect(
        [&](double lambda) { return load(lambda) - budget; }, 0.0, hi,
        [](double v) { return v > 0.0; }, [tol](double v) { return v <= 0.0 && -v <= tol; }, 200);
    for (std::size_t n : offloaded) x.s[n] = edge_steps_at_price(model, n, r.hi);
  }
  round_steps_to_budget(model, x);
  return x;
}

ComponentTotals objective_breakdown(const Model& model, const Allocation& alloc) {
  ComponentTotals t;
  for (std::size_t n = 0; n < model.size(); ++n) {
    const double a = alloc.a[n];
    const double s = alloc.s[n];
    t.time_total += (1.0 - a) * model.computation_time(n, s, Mode::kLocal) +
                    a * model.computation_time(n, s, Mode::kEdge);
    t.energy_total += (1.0 - a) * model.energy(n, s, Mode::kLocal) + a * model.energy(n, s, Mode::kEdge);
    t.error_mean += model.average_error(n, s);
    t.utility_total += model.utility(n, s);
  }
  t.error_mean /= static_cast<double>(model.size());
  t.accuracy = 1.0 - t.error_mean;
  return t;
}

double binary_gap(const Allocation& alloc) {
  double gap = 0.0;
  for (double a : alloc.a) gap = std::max(gap, std::min(a, 1.0 - a));
  return gap;
}

}  // namespace diffstep
