#include "diffstep/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include <fmt/format.h>

#include "diffstep/oracle.hpp"
#include "diffstep/random.hpp"
#include "diffstep/sca.hpp"

namespace diffstep {

const char* to_string(Method method) {
  switch (method) {
    case Method::kProposed: return "proposed";
    case Method::kBaseline: return "baseline";
    case Method::kOracle: return "oracle";
  }
  return "?";
}

const char* to_string(SweptParam param) {
  switch (param) {
    case SweptParam::kEdgeBudget: return "s_edge_budget";
    case SweptParam::kCostWeights: return "cost_weights";
    case SweptParam::kLocalCap: return "s_cap_local";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name) {
  for (auto m : {Method::kProposed, Method::kBaseline, Method::kOracle}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

std::optional<SweptParam> parse_swept_param(const std::string& name) {
  for (auto p : {SweptParam::kEdgeBudget, SweptParam::kCostWeights, SweptParam::kLocalCap}) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

SystemConfig default_paper_config() {
  SystemConfig c;
  UeProfile ue;
  ue.delta_t_local = 1.0 / 500.0;
  ue.delta_t_edge = 1.0 / 1000.0;
  ue.cpu_freq_edge_alloc = 10e9;
  ue.cpu_freq_local = 1.5e9;
  ue.k_local = 1e-26;
  ue.c1_attenuation = 0.05;
  ue.c2_utility = 0.02;
  ue.s_cap_local = 200.0;
  ue.s_cap_edge = 500.0;
  c.ues.assign(30, ue);
  c.k_edge = 1e-26;
  c.eps_fwd = 1.0;
  c.tau_penalty = 1e5;
  c.s_edge_budget = 3000.0;
  c.cost_weights = normalized_cost_weights(c.ues, c.eps_fwd, WeightPreset::kEqual);
  c.blend_weights = {0.5, 0.5};
  return c;
}

ConfigProvenance config_provenance() {
  return {
      {"N", "delta_t_local", "delta_t_edge", "cpu_freq_local", "cpu_freq_edge_alloc", "k_local",
       "k_edge", "eps_fwd", "tau_penalty"},
      {"c1_attenuation", "c2_utility", "s_caps", "weight_presets", "tolerances"},
  };
}

SystemConfig random_instance(std::size_t n, std::uint64_t seed) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 1);
  const auto draw = [&rng](UeProfile& ue) {
    ue.delta_t_local = rng.uniform(0.8, 1.2) / 500.0;
    ue.delta_t_edge = rng.uniform(0.8, 1.2) / 1000.0;
    ue.c1_attenuation = rng.uniform(0.02, 0.08);
    ue.c2_utility = rng.uniform(0.01, 0.03);
    ue.cpu_freq_local = rng.uniform(1.0e9, 2.0e9);
    ue.cpu_freq_edge_alloc = rng.uniform(1.2e9, 3.0e9);
    ue.s_cap_local = std::round(rng.uniform(100.0, 200.0));
    ue.s_cap_edge = std::round(rng.uniform(300.0, 500.0));
  };
  SystemConfig c = default_paper_config();
  c.ues.resize(n);
  for (auto& ue : c.ues) draw(ue);
  c.seed = seed;
  c.allow_nonpositive_cost = true;
  // Redraw the UEs whose cost dips to zero or below; the weights depend on
  // every UE, so re-check all of them after each round.
  for (int round = 0;; ++round) {
    c.cost_weights = normalized_cost_weights(c.ues, c.eps_fwd, WeightPreset::kEqual);
    const Model probe(c);
    bool redrawn = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (min_net_cost(probe, k) > 0.0) continue;
      if (round > 1000) throw ConfigError("ues", "random_instance could not reach R > 0");
      draw(c.ues[k]);
      redrawn = true;
    }
    if (!redrawn) break;
  }
  double edge_caps = 0.0;
  for (const auto& ue : c.ues) edge_caps += ue.s_cap_edge;
  c.s_edge_budget = std::round(rng.uniform(0.2, 0.6) * edge_caps);
  c.allow_nonpositive_cost = false;
  validate(c);
  return c;
}

Allocation random_baseline(const Model& model, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t N = model.size();
  Allocation x;
  x.a.resize(N);
  x.s.resize(N);
  double edge = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    x.a[n] = rng.coin() ? 1.0 : 0.0;
    x.s[n] = rng.uniform(0.0, model.step_cap(n, x.a[n]));
    if (x.a[n] == 1.0) edge += x.s[n];
  }
  const double budget = model.config().s_edge_budget;
  if (edge > budget) {
    const double scale = budget / edge;
    for (std::size_t n = 0; n < N; ++n) {
      if (x.a[n] == 1.0) x.s[n] *= scale;
    }
  }
  round_steps_to_budget(model, x);
  return x;
}

namespace {

void apply_value(SystemConfig& c, SweptParam param, double value,
                 std::optional<WeightPreset>& preset) {
  switch (param) {
    case SweptParam::kEdgeBudget:
      c.s_edge_budget = value;
      break;
    case SweptParam::kLocalCap:
      for (auto& ue : c.ues) ue.s_cap_local = value;
      break;
    case SweptParam::kCostWeights: {
      const auto index = static_cast<int>(value);
      if (index < 0 || index > 3 || index != value) {
        throw ConfigError("cost_weights", "swept value is a preset index in {0, 1, 2, 3}");
      }
      preset = static_cast<WeightPreset>(index);
      break;
    }
  }
}

std::string status_of(const SolveReport& r) {
  if (r.status != SolveStatus::kError) return to_string(r.status);
  const auto colon = r.error.find(':');
  return "error:" + r.error.substr(0, colon);
}

void fill_outcome(ExperimentRecord& rec, const Model& model, const Allocation& binary) {
  rec.objective = model.objective(binary);
  const ComponentTotals t = objective_breakdown(model, binary);
  rec.time_total = t.time_total;
  rec.accuracy = t.accuracy;
  rec.energy_total = t.energy_total;
  rec.utility_total = t.utility_total;
  rec.offloaded_count = static_cast<int>(std::count(binary.a.begin(), binary.a.end(), 1.0));
}

}  // namespace

SystemConfig sweep_point_config(const SweepSpec& spec, double value, std::uint64_t seed) {
  SystemConfig c = spec.base;
  std::optional<WeightPreset> preset = spec.cost_preset;
  for (const auto& [param, v] : spec.fixed) apply_value(c, param, v, preset);
  apply_value(c, spec.param, value, preset);
  if (preset) c.cost_weights = normalized_cost_weights(c.ues, c.eps_fwd, *preset);
  c.seed = seed;
  return c;
}

ExperimentRecord run_point(const SystemConfig& config, Method method, double grid_step,
                           bool record_timing) {
  ExperimentRecord rec;
  rec.method = method;
  rec.seed = config.seed;
  rec.cost_weights = config.cost_weights;
  rec.blend_weights = config.blend_weights;
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  const auto start = std::chrono::steady_clock::now();
  try {
    const Model model(config);
    switch (method) {
      case Method::kProposed: {
        const SolveReport r = inter_solve(model);
        fill_outcome(rec, model, r.allocation_binary);
        rec.iterations_outer = r.outer_iterations;
        rec.iterations_inner = r.inner_iterations;
        rec.status = status_of(r);
        break;
      }
      case Method::kBaseline:
        fill_outcome(rec, model, random_baseline(model, config.seed));
        rec.status = "ok";
        break;
      case Method::kOracle: {
        const OracleResult r = brute_force(model, grid_step);
        Allocation x{{r.best_a.begin(), r.best_a.end()}, r.best_s};
        fill_outcome(rec, model, x);
        rec.status = "ok";
        break;
      }
    }
  } catch (const ConfigError&) {
    rec.objective = rec.time_total = rec.accuracy = rec.energy_total = rec.utility_total = nan;
    rec.status = "error:invalid_config";
  } catch (const std::exception&) {
    rec.objective = rec.time_total = rec.accuracy = rec.energy_total = rec.utility_total = nan;
    rec.status = "error:internal";
  }
  if (record_timing) {
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                      .count();
  }
  return rec;
}

std::vector<ExperimentRecord> run_sweep(const SweepSpec& spec, const SweepOptions& options) {
  if (spec.values.empty()) throw std::invalid_argument("sweep value list is empty");
  if (spec.methods.empty()) throw std::invalid_argument("sweep method list is empty");
  if (spec.seeds.empty()) throw std::invalid_argument("sweep seed list is empty");

  struct Task {
    Method method;
    double value;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Method m : spec.methods) {
    for (double v : spec.values) {
      for (std::uint64_t s : spec.seeds) tasks.push_back({m, v, s});
    }
  }

  std::vector<ExperimentRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      ExperimentRecord rec;
      try {
        rec = run_point(sweep_point_config(spec, t.value, t.seed), t.method, spec.grid_step,
                        options.record_timing);
      } catch (const ConfigError&) {
        rec.method = t.method;
        rec.seed = t.seed;
        rec.status = "error:invalid_config";
      }
      rec.param = spec.param;
      rec.swept_value = t.value;
      records[i] = std::move(rec);
    }
  };

  unsigned jobs = options.jobs ? options.jobs : std::max(1U, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, tasks.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  return records;
}

std::vector<double> default_budget_grid() {
  std::vector<double> grid;
  for (int v = 1000; v <= 10000; v += 1000) grid.push_back(v);
  return grid;
}

std::vector<SweepSpec> consumption_sweep_specs() {
  std::vector<SweepSpec> specs;
  for (auto preset : {WeightPreset::kEqual, WeightPreset::kTimeHeavy, WeightPreset::kErrorHeavy,
                      WeightPreset::kEnergyHeavy}) {
    SweepSpec s;
    s.cost_preset = preset;
    s.param = SweptParam::kEdgeBudget;
    s.values = default_budget_grid();
    s.methods = {Method::kProposed};
    if (preset == WeightPreset::kEqual) s.methods.push_back(Method::kBaseline);
    specs.push_back(std::move(s));
  }
  return specs;
}

std::vector<SweepSpec> utility_sweep_specs() {
  std::vector<SweepSpec> specs;
  for (double cap : {100.0, 200.0, 400.0}) {
    SweepSpec s;
    s.base.blend_weights = {0.3, 0.7};
    s.cost_preset = WeightPreset::kEqual;
    s.fixed = {{SweptParam::kLocalCap, cap}};
    s.param = SweptParam::kEdgeBudget;
    s.values = default_budget_grid();
    specs.push_back(std::move(s));
  }
  return specs;
}

std::string csv_header() {
  return "method,seed,swept_param,swept_value,c1,c2,c3,w1,w2,objective,T_total_s,accuracy,"
         "E_total_J,U_total,offloaded_count,iter_outer,iter_inner,wall_ms,status";
}

std::string format_csv_row(const ExperimentRecord& r) {
  return fmt::format(
      "{},{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{},{},{},"
      "{:.9g},{}",
      to_string(r.method), r.seed, to_string(r.param), r.swept_value, r.cost_weights.time,
      r.cost_weights.error, r.cost_weights.energy, r.blend_weights.cost, r.blend_weights.utility,
      r.objective, r.time_total, r.accuracy, r.energy_total, r.utility_total, r.offloaded_count,
      r.iterations_outer, r.iterations_inner, r.wall_ms, r.status);
}

void write_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
  out << csv_header() << '\n';
  for (const auto& r : records) out << format_csv_row(r) << '\n';
}

}  // namespace diffstep
