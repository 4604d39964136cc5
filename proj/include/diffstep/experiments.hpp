#pragma once

// Experiment harness: default configuration, random baseline, sweeps and
// CSV records.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "diffstep/model.hpp"

namespace diffstep {

enum class Method { kProposed, kBaseline, kOracle };
enum class SweptParam { kEdgeBudget, kCostWeights, kLocalCap };

const char* to_string(Method method);
const char* to_string(SweptParam param);
std::optional<Method> parse_method(const std::string& name);
std::optional<SweptParam> parse_swept_param(const std::string& name);

/// N = 30 identical UEs with the published constants; C1, C2, step caps,
/// weights and tolerances are project defaults (see config_provenance()).
SystemConfig default_paper_config();

struct ConfigProvenance {
  std::vector<std::string> paper;      // fields taken from the published setup
  std::vector<std::string> non_paper;  // project-chosen defaults
};

ConfigProvenance config_provenance();

/// Heterogeneous instance around the default constants: per-UE jitter on the
/// step times, CPU frequencies, decay rates and caps, with edge capacities of
/// 1.2-3 GHz so offloading competes with local processing, and a budget that
/// covers roughly 20-60 % of the total edge cap. Cost weights use the
/// equal-normalized preset. Resamples (deterministically) until R > 0 holds.
SystemConfig random_instance(std::size_t n, std::uint64_t seed);

/// a_n by fair coin, s_n uniform on the applicable cap, offloaded steps
/// scaled down proportionally to the budget, then integer-rounded.
Allocation random_baseline(const Model& model, std::uint64_t seed);

struct SweepSpec {
  SystemConfig base = default_paper_config();
  // when set, cost weights are re-normalized after every parameter change
  std::optional<WeightPreset> cost_preset;
  std::vector<std::pair<SweptParam, double>> fixed;
  SweptParam param = SweptParam::kEdgeBudget;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds{0};
  std::vector<Method> methods{Method::kProposed};
  double grid_step = 1.0;  // oracle only
};

struct ExperimentRecord {
  Method method = Method::kProposed;
  std::uint64_t seed = 0;
  SweptParam param = SweptParam::kEdgeBudget;
  double swept_value = 0.0;
  CostWeights cost_weights;
  BlendWeights blend_weights;
  double objective = 0.0;
  double time_total = 0.0;
  double accuracy = 0.0;
  double energy_total = 0.0;
  double utility_total = 0.0;
  int offloaded_count = 0;
  int iterations_outer = 0;
  int iterations_inner = 0;
  double wall_ms = 0.0;
  std::string status;
};

/// Config for one sweep point: `fixed` overrides, then the swept value, then
/// the preset re-normalization, then the seed. A kCostWeights value is a
/// WeightPreset index.
SystemConfig sweep_point_config(const SweepSpec& spec, double value, std::uint64_t seed);

struct SweepOptions {
  unsigned jobs = 0;           // 0 = hardware concurrency
  bool record_timing = false;  // wall_ms stays 0 unless set, keeping CSVs byte-stable
};

/// One record per (method, value, seed), ordered method-major, then value,
/// then seed. Failures are reported in the record status.
std::vector<ExperimentRecord> run_sweep(const SweepSpec& spec, const SweepOptions& options = {});

/// Runs one method on one config; never throws for solver or config failures.
ExperimentRecord run_point(const SystemConfig& config, Method method, double grid_step,
                           bool record_timing);

/// Weight-preset sweeps over the edge budget, plus the random baseline on the
/// equal preset.
std::vector<SweepSpec> consumption_sweep_specs();
/// (w1, w2) = (0.3, 0.7) objective sweeps over the edge budget, one spec per
/// local cap in {100, 200, 400}.
std::vector<SweepSpec> utility_sweep_specs();
std::vector<double> default_budget_grid();

std::string csv_header();
std::string format_csv_row(const ExperimentRecord& record);
void write_csv(std::ostream& out, std::span<const ExperimentRecord> records);

}  // namespace diffstep
