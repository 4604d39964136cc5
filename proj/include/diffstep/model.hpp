#pragma once

// System model for joint offloading / reverse-diffusion step allocation.
//
// Each user equipment (UE) n either runs its generation task locally
// (mode kLocal, a_n = 0) or offloads it to the edge server (mode kEdge,
// a_n = 1) and receives s_n reverse-diffusion steps. Every quantity below is
// a closed-form function of s_n; the blended per-UE cost
//
//   R_{n,r}(s) = w1 * (c1 * T_{n,r}(s) + c2 * err_n(s) + c3 * E_{n,r}(s)) - w2 * U_n(s)
//
// drives the P1 objective sum_n (1 - a_n) R_{n,0}(s_n) + a_n R_{n,1}(s_n).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffstep {

enum class Mode { kLocal = 0, kEdge = 1 };

struct UeProfile {
  double delta_t_local = 1.0 / 500.0;  // s per step on the device
  double delta_t_edge = 1.0 / 1000.0;  // s per step on the edge server
  double c1_attenuation = 0.05;        // error decay rate per step
  double c2_utility = 0.02;            // utility saturation rate per step
  double cpu_freq_local = 1.5e9;       // cycles/s
  double cpu_freq_edge_alloc = 1e10;   // cycles/s reserved at the edge
  double k_local = 1e-26;
  double s_cap_local = 200.0;
  double s_cap_edge = 500.0;
};

/// Weights (c1, c2, c3) on time, error and energy.
struct CostWeights {
  double time = 1.0;
  double error = 1.0;
  double energy = 1.0;
};

/// Weights (w1, w2) on the aggregated cost and on the utility.
struct BlendWeights {
  double cost = 1.0;
  double utility = 0.0;
};

struct Tolerances {
  double inner = 1e-10;           // relative P2 change that stops the inner loop
  double outer = 1e-4;            // max-norm change of (a, s / s_upper) between outer iterations
  double bisection = 1e-8;        // absolute residual for every 1-D root solve
  int max_inner = 100;            // K
  int max_outer = 50;             // I
  double aux_floor = 1e-9;        // lower bound on u, v, z
  int bisection_max_iter = 200;
};

/// Starting point of the SCA iteration. An unset s0 means min(caps) / 2 per UE.
struct Initialization {
  double a0 = 0.5;
  std::optional<double> s0;
  int starts = 1;
};

struct SystemConfig {
  std::vector<UeProfile> ues;
  double k_edge = 1e-26;
  double s_edge_budget = 3000.0;
  double eps_fwd = 1.0;
  CostWeights cost_weights;
  BlendWeights blend_weights;
  double tau_penalty = 1e5;
  Tolerances tolerances;
  Initialization init;
  std::uint64_t seed = 0;
  // Skips the R > 0 scan; auxiliary updates then floor R at kCostFloor.
  bool allow_nonpositive_cost = false;
};

inline constexpr double kCostFloor = 1e-9;

/// Raised when a SystemConfig violates one of its invariants.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, std::string invariant);

  const std::string& field() const { return field_; }
  const std::string& invariant() const { return invariant_; }

 private:
  std::string field_;
  std::string invariant_;
};

/// Offload indicators a (relaxed in [0,1] or binary) and step counts s.
struct Allocation {
  std::vector<double> a;
  std::vector<double> s;

  std::size_t size() const { return a.size(); }
};

struct FeasibilityReport {
  bool feasible = false;
  double edge_slack = 0.0;        // S_e^max - sum_n a_n s_n
  std::vector<double> cap_slack;  // (1-a_n) S0 + a_n S1 - s_n
  bool a_in_box = true;
  bool s_nonnegative = true;
  std::vector<std::size_t> cap_violations;
};

/// Throws ConfigError naming the first violated invariant.
void validate(const SystemConfig& config);

/// Immutable, validated view of a SystemConfig with the per-UE cost model.
class Model {
 public:
  explicit Model(SystemConfig config);

  const SystemConfig& config() const { return config_; }
  std::size_t size() const { return config_.ues.size(); }
  const UeProfile& ue(std::size_t n) const { return config_.ues[n]; }

  double computation_time(std::size_t n, double s, Mode mode) const;
  double average_error(std::size_t n, double s) const;
  double energy(std::size_t n, double s, Mode mode) const;
  double utility(std::size_t n, double s) const;

  /// R_{n,r}(s).
  double net_cost(std::size_t n, double s, Mode mode) const;
  /// dR_{n,r}/ds, analytic.
  double net_cost_derivative(std::size_t n, double s, Mode mode) const;

  /// (1 - a) S0 + a S1.
  double step_cap(std::size_t n, double a) const;
  /// max(S0, S1), the implicit upper end of the step box.
  double step_upper(std::size_t n) const;

  /// P1 objective; fractional a blends the two branches.
  double objective(const Allocation& alloc) const;

  /// Constraint slacks. `tol` is the absolute slack accepted as satisfied.
  FeasibilityReport check_feasibility(const Allocation& alloc, double tol = 0.0) const;

 private:
  void check_dims(const Allocation& alloc) const;

  SystemConfig config_;
};

/// Smallest R_{n,r} over s in [0, step_upper(n)] for either mode.
double min_net_cost(const Model& model, std::size_t n);

enum class WeightPreset { kEqual = 0, kTimeHeavy = 1, kErrorHeavy = 2, kEnergyHeavy = 3 };

const char* to_string(WeightPreset preset);
std::optional<WeightPreset> parse_weight_preset(const std::string& name);

/// Cost weights that divide each component by its UE-averaged local value at
/// s = s_cap_local / 2; non-equal presets scale one component by 5.
CostWeights normalized_cost_weights(const std::vector<UeProfile>& ues, double eps_fwd,
                                    WeightPreset preset);

}  // namespace diffstep
