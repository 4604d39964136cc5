// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [criterion ...]   (no arguments runs all ten)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "diffstep/experiments.hpp"
#include "diffstep/kkt.hpp"
#include "diffstep/oracle.hpp"
#include "diffstep/random.hpp"
#include "diffstep/sca.hpp"
#include "diffstep/surrogate.hpp"
#include "reference.hpp"

using namespace diffstep;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Allocation random_interior(const Model& model, Rng& rng) {
  Allocation x;
  for (std::size_t n = 0; n < model.size(); ++n) {
    const double a = rng.uniform(0.05, 0.95);
    x.a.push_back(a);
    x.s.push_back(rng.uniform(1.0, model.step_cap(n, a)));
  }
  return x;
}

// starting point of a seeded run on a fixed instance
Allocation seeded_start(const Model& model, std::uint64_t seed) {
  Rng rng(seed);
  return random_interior(model, rng);
}

Outcome surrogate_tightness() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  int fails = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Model model(random_instance(8, seed));
    Rng rng(seed ^ 0x5eedULL);
    const Allocation x = random_interior(model, rng);
    const AuxiliaryState aux = update_auxiliaries(model, x);
    const long double p1 = ref::objective(model.config(), x.a, x.s);
    const double g = surrogate_objective(model, x, aux);
    const double err = static_cast<double>(std::fabs(g - p1) / (1.0L + std::fabs(p1)));
    worst = std::max(worst, err);
    fails += err > 1e-9;
  }
  const double secs = seconds_since(t0);
  return {fails == 0 && secs < 1.0,
          fmt::format("1000 points, worst rel gap {:.3g} (tol 1e-9), {:.3f} s (limit 1 s)", worst, secs)};
}

Outcome majorization() {
  const auto t0 = Clock::now();
  double worst_g = 0.0, worst_mass = 0.0;
  int fails = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const Model model(random_instance(4, seed));
    Rng rng(seed * 7919 + 1);
    const AuxiliaryState aux = update_auxiliaries(model, random_interior(model, rng));
    Allocation x;
    for (std::size_t n = 0; n < model.size(); ++n) {
      x.a.push_back(rng.uniform());
      x.s.push_back(rng.uniform(0.0, model.step_cap(n, x.a.back())));
    }
    const double p1 = static_cast<double>(ref::objective(model.config(), x.a, x.s));
    const double g = surrogate_objective(model, x, aux);
    long double as = 0.0L;
    for (std::size_t n = 0; n < x.size(); ++n) as += static_cast<long double>(x.a[n]) * x.s[n];
    const double mass = surrogate_edge_mass(x, aux.z);
    worst_g = std::min(worst_g, g - p1);
    worst_mass = std::min(worst_mass, static_cast<double>(mass - as));
    fails += (g < p1 - 1e-12) || (mass < as - 1e-12);
  }
  const double secs = seconds_since(t0);
  return {fails == 0 && secs < 5.0,
          fmt::format("10^4 points, min(G - P1) {:.3g}, min(mass - sum a s) {:.3g}, {:.3f} s (limit 5 s)",
                      worst_g, worst_mass, secs)};
}

struct KktResiduals {
  double stat_a = 0, stat_s = 0, primal = 0, slack = 0, dual = 0;
};

// Residuals of the P2 optimality conditions, evaluated from first principles.
KktResiduals kkt_residuals(const Model& model, const AuxiliaryState& aux, const PenaltyAnchor& anchor,
                           const KktSolution& sol) {
  const SystemConfig& c = model.config();
  const auto& [x, m] = sol;
  KktResiduals r;
  long double mass = 0.0L;
  for (std::size_t n = 0; n < model.size(); ++n) {
    const UeProfile& ue = c.ues[n];
    const long double a = x.a[n], s = x.s[n];
    const long double u = aux.u[n], v = aux.v[n], z = aux.z[n];
    const long double p = anchor.a_prev[n];
    // d/da of g_n - tau H + beta(-a) + gamma(a - 1) + zeta(s - cap(a)) + delta(s^2 z + a^2/(4z))
    const long double dl_da = -(1.0L - a) / (2.0L * u) + a / (2.0L * v) - c.tau_penalty * (2.0L * p - 1.0L) -
                              m.beta[n] + m.gamma[n] + m.zeta[n] * (ue.s_cap_local - ue.s_cap_edge) +
                              m.delta * a / (2.0L * z);
    r.stat_a = std::max(r.stat_a, static_cast<double>(std::fabs(dl_da)));
    const long double dl_ds = 2.0L * ref::cost(c, ue, s, false) * ref::cost_slope(c, ue, s, false) * u +
                              2.0L * ref::cost(c, ue, s, true) * ref::cost_slope(c, ue, s, true) * v +
                              2.0L * m.delta * s * z + m.zeta[n];
    // the step box [0, max caps] carries implicit multipliers: a boundary
    // point only needs the sign that pushes against the bound
    const long double upper = std::max(ue.s_cap_local, ue.s_cap_edge);
    long double ds_res = std::fabs(dl_ds);
    if (s == 0.0L) ds_res = std::max(-dl_ds, 0.0L);
    if (s == upper) ds_res = std::max(dl_ds, 0.0L);
    r.stat_s = std::max(r.stat_s, static_cast<double>(ds_res));

    const long double cap_gap = s - ref::cap(ue, a);
    r.primal = std::max({r.primal, static_cast<double>(-a), static_cast<double>(a - 1.0L),
                         static_cast<double>(-s), static_cast<double>(cap_gap)});
    r.dual = std::max({r.dual, -m.beta[n], -m.gamma[n], -m.zeta[n]});
    r.slack = std::max({r.slack, static_cast<double>(std::fabs(m.beta[n] * a)),
                        static_cast<double>(std::fabs(m.gamma[n] * (a - 1.0L))),
                        static_cast<double>(std::fabs(m.zeta[n] * cap_gap))});
    mass += s * s * z + a * a / (4.0L * z);
  }
  const long double budget_gap = mass - c.s_edge_budget;
  r.primal = std::max(r.primal, static_cast<double>(budget_gap));
  r.dual = std::max(r.dual, -m.delta);
  r.slack = std::max(r.slack, static_cast<double>(std::fabs(m.delta * budget_gap)));
  return r;
}

Outcome kkt_residual_check() {
  const auto t0 = Clock::now();
  KktResiduals worst;
  int fails = 0, errors = 0, active_budget = 0, active_cap = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Model model(random_instance(10, seed));
    Rng rng(seed + 101);
    const AuxiliaryState aux = update_auxiliaries(model, random_interior(model, rng));
    PenaltyAnchor anchor;
    for (std::size_t n = 0; n < model.size(); ++n) {
      // a third of the anchors sit near 0.5 so interior a is exercised
      anchor.a_prev.push_back(seed % 3 == 0 ? 0.5 + 1e-6 * rng.uniform(-1.0, 1.0) : rng.uniform());
    }
    try {
      const KktSolution sol = solve_kkt(model, aux, anchor);
      const KktResiduals r = kkt_residuals(model, aux, anchor, sol);
      worst.stat_a = std::max(worst.stat_a, r.stat_a);
      worst.stat_s = std::max(worst.stat_s, r.stat_s);
      worst.primal = std::max(worst.primal, r.primal);
      worst.slack = std::max(worst.slack, r.slack);
      worst.dual = std::max(worst.dual, r.dual);
      active_budget += sol.multipliers.delta > 0.0;
      active_cap += std::any_of(sol.multipliers.zeta.begin(), sol.multipliers.zeta.end(),
                                [](double z) { return z > 0.0; });
      fails += std::max({r.stat_a, r.stat_s, r.primal, r.slack, r.dual}) > 1e-6;
    } catch (const SolverError&) {
      ++errors;
    }
  }
  const double secs = seconds_since(t0);
  return {fails == 0 && errors == 0 && secs < 30.0,
          fmt::format("100 sub-problems: max |dL/da| {:.2g}, |dL/ds| {:.2g}, primal {:.2g}, "
                      "compl. slack {:.2g}, dual {:.2g} (tol 1e-6); delta>0 in {}, zeta>0 in {}; "
                      "{} solver errors; {:.2f} s (limit 30 s)",
                      worst.stat_a, worst.stat_s, worst.primal, worst.slack, worst.dual, active_budget,
                      active_cap, errors, secs)};
}

Outcome inner_descent() {
  const Model model(default_paper_config());
  double worst_rise = -INFINITY;
  int fails = 0, steps = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const SolveReport r = inter_solve(model, seeded_start(model, seed));
    if (r.status == SolveStatus::kError) {
      ++fails;
      continue;
    }
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      if (r.trace[k].outer != r.trace[k - 1].outer) continue;
      const double rise = r.trace[k].p2 - r.trace[k - 1].p2;
      worst_rise = std::max(worst_rise, rise);
      fails += rise > 1e-8;
      ++steps;
    }
  }
  return {fails == 0, fmt::format("50 runs, {} inner steps, largest P2 increase {:.3g} (tol 1e-8)",
                                  steps, worst_rise)};
}

// Sum over UEs of the largest one-step change of either branch cost on the grid.
double grid_slack(const Model& model, double h) {
  double total = 0.0;
  for (std::size_t n = 0; n < model.size(); ++n) {
    const UeProfile& ue = model.ue(n);
    double worst = 0.0;
    for (bool edge : {false, true}) {
      const double cap = edge ? ue.s_cap_edge : ue.s_cap_local;
      for (double s = 0.0; s + h <= cap; s += h) {
        worst = std::max(worst, static_cast<double>(std::fabs(ref::cost(model.config(), ue, s + h, edge) -
                                                              ref::cost(model.config(), ue, s, edge))));
      }
    }
    total += worst;
  }
  return total;
}

Outcome oracle_gap() {
  const auto t0 = Clock::now();
  int within = 0, below_bound = 0, offloading = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Model model(random_instance(6, seed));
    const SolveReport sca = inter_solve(model);
    const OracleResult oracle = brute_force(model, 1.0);
    const double ratio = sca.objective_binary / oracle.best_objective;
    worst_ratio = std::max(worst_ratio, ratio);
    within += ratio <= 1.10;
    below_bound += sca.objective_binary < oracle.best_objective - grid_slack(model, 1.0);
    offloading += std::count(oracle.best_a.begin(), oracle.best_a.end(), 1) > 0;
  }
  const double secs = seconds_since(t0);
  return {within >= 45 && below_bound == 0 && secs < 120.0,
          fmt::format("ratio <= 1.10 on {}/50 (need 45), worst ratio {:.4f}, below oracle bound on {}; "
                      "oracle offloads on {}/50; {:.1f} s (limit 120 s)",
                      within, worst_ratio, below_bound, offloading, secs)};
}

Outcome binary_convergence() {
  const Model model(default_paper_config());
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SolveReport r = inter_solve(model, seeded_start(model, seed));
    const double gap = binary_gap(r.allocation_relaxed);
    worst = std::max(worst, gap);
    ok += r.status != SolveStatus::kError && gap <= 1e-3;
  }
  return {ok >= 19, fmt::format("gap <= 1e-3 on {}/20 seeds (need 19), worst gap {:.3g}", ok, worst)};
}

struct SweepRuns {
  std::string csv_first, csv_second;
  std::vector<ExperimentRecord> consumption, utility;
  double seconds = 0.0;
};

const SweepRuns& sweep_runs() {
  static const SweepRuns runs = [] {
    SweepRuns r;
    const auto t0 = Clock::now();
    for (const auto& spec : consumption_sweep_specs()) {
      auto recs = run_sweep(spec);
      r.consumption.insert(r.consumption.end(), recs.begin(), recs.end());
    }
    for (const auto& spec : utility_sweep_specs()) {
      auto recs = run_sweep(spec);
      r.utility.insert(r.utility.end(), recs.begin(), recs.end());
    }
    r.seconds = seconds_since(t0);
    std::vector<ExperimentRecord> all = r.consumption;
    all.insert(all.end(), r.utility.begin(), r.utility.end());
    std::ostringstream first;
    write_csv(first, all);
    r.csv_first = first.str();

    std::vector<ExperimentRecord> again;
    for (const auto& specs : {consumption_sweep_specs(), utility_sweep_specs()}) {
      for (const auto& spec : specs) {
        auto recs = run_sweep(spec);
        again.insert(again.end(), recs.begin(), recs.end());
      }
    }
    std::ostringstream second;
    write_csv(second, again);
    r.csv_second = second.str();
    return r;
  }();
  return runs;
}

// tolerance for comparing sums that should be equal up to round-off
bool leq(double a, double b) { return a <= b + 1e-9 * (1.0 + std::fabs(b)); }

Outcome consumption_trends() {
  const SweepRuns& runs = sweep_runs();
  const CostWeights equal = normalized_cost_weights(default_paper_config().ues, 1.0, WeightPreset::kEqual);
  std::vector<const ExperimentRecord*> proposed, baseline;
  for (const auto& r : runs.consumption) {
    if (r.cost_weights.time != equal.time || r.cost_weights.energy != equal.energy ||
        r.cost_weights.error != equal.error)
      continue;
    (r.method == Method::kProposed ? proposed : baseline).push_back(&r);
  }
  const auto grid = default_budget_grid();
  if (proposed.size() != grid.size() || baseline.size() != grid.size())
    return {false, fmt::format("expected {} points per method, got {} / {}", grid.size(), proposed.size(),
                               baseline.size())};
  int bad_t = 0, bad_e = 0, bad_base = 0, errors = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    errors += proposed[k]->status.starts_with("error") || baseline[k]->status.starts_with("error");
    bad_base += !leq(proposed[k]->objective, baseline[k]->objective);
    if (k == 0) continue;
    bad_t += !leq(proposed[k]->time_total, proposed[k - 1]->time_total);
    bad_e += !leq(proposed[k - 1]->energy_total, proposed[k]->energy_total);
  }
  return {bad_t + bad_e + bad_base + errors == 0 && runs.seconds < 300.0,
          fmt::format("T_total {:.4g} -> {:.4g} s, E_total {:.4g} -> {:.4g} J, offloaded {} -> {}; "
                      "violations: T {}, E {}, baseline {}; errors {}; sweeps {:.1f} s (limit 300 s)",
                      proposed.front()->time_total, proposed.back()->time_total,
                      proposed.front()->energy_total, proposed.back()->energy_total,
                      proposed.front()->offloaded_count, proposed.back()->offloaded_count, bad_t, bad_e,
                      bad_base, errors, runs.seconds)};
}

Outcome utility_trends() {
  const SweepRuns& runs = sweep_runs();
  const std::size_t points = default_budget_grid().size();
  if (runs.utility.size() != 3 * points) return {false, "unexpected record count"};
  std::string detail;
  bool pass = true;
  for (std::size_t c = 0; c < 3; ++c) {
    const auto* curve = &runs.utility[c * points];
    bool monotone = true, plateau = true;
    for (std::size_t k = 1; k < points; ++k) {
      monotone = monotone && leq(curve[k].objective, curve[k - 1].objective) &&
                 !curve[k].status.starts_with("error");
      if (k + 3 >= points) plateau = plateau && std::fabs(curve[k].objective - curve[k - 1].objective) < 1e-3;
    }
    pass = pass && monotone && plateau;
    detail += fmt::format("{}curve {}: {:.5g} -> {:.5g}, non-increasing {}, plateau {}", c ? "; " : "", c,
                          curve[0].objective, curve[points - 1].objective, monotone, plateau);
  }
  return {pass, detail};
}

Outcome complexity_scaling() {
  const std::vector<std::size_t> sizes{10, 100, 1000};
  std::vector<double> secs;
  std::string iters;
  for (std::size_t n : sizes) {
    SystemConfig c = random_instance(n, 7);
    // zero tolerances: every run spends exactly the iteration caps
    c.tolerances.inner = 0.0;
    c.tolerances.outer = 0.0;
    c.tolerances.max_outer = 3;
    c.tolerances.max_inner = 5;
    const Model model(c);
    const Allocation start = seeded_start(model, 7);
    double best = INFINITY;
    SolveReport r;
    for (int rep = 0; rep < 3; ++rep) {
      const auto t0 = Clock::now();
      r = inter_solve(model, start);
      best = std::min(best, seconds_since(t0));
    }
    secs.push_back(best);
    iters += fmt::format("{}N={}: {}x{} iters {:.4f} s", iters.empty() ? "" : ", ", n, r.outer_iterations,
                         r.inner_iterations, best);
  }
  // least squares fit of time against N
  const double k = static_cast<double>(sizes.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) mx += sizes[i] / k, my += secs[i] / k;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double dx = sizes[i] - mx, dy = secs[i] - my;
    sxy += dx * dy, sxx += dx * dx, syy += dy * dy;
  }
  const double r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 0.0;
  return {r2 >= 0.95, fmt::format("{}; linear fit R^2 = {:.4f} (need 0.95)", iters, r2)};
}

Outcome determinism() {
  const SweepRuns& runs = sweep_runs();
  const bool same = runs.csv_first == runs.csv_second;
  return {same && !runs.csv_first.empty(),
          fmt::format("two full sweep runs, {} bytes, identical: {}", runs.csv_first.size(), same)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"surrogate tightness", surrogate_tightness},
      {"majorization", majorization},
      {"KKT residuals", kkt_residual_check},
      {"inner descent", inner_descent},
      {"oracle gap", oracle_gap},
      {"binary convergence", binary_convergence},
      {"budget sweep trends (equal weights)", consumption_trends},
      {"objective plateau (w = 0.3, 0.7)", utility_trends},
      {"complexity scaling", complexity_scaling},
      {"determinism", determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failed += !o.pass;
    fmt::print("{} [{}] {}: {}\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
