#include "diffstep/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace diffstep {

ConfigError::ConfigError(std::string field, std::string invariant)
    : std::invalid_argument(fmt::format("invalid config: {} violates '{}'", field, invariant)),
      field_(std::move(field)),
      invariant_(std::move(invariant)) {}

namespace {

void require(bool ok, const std::string& field, const char* invariant) {
  if (!ok) throw ConfigError(field, invariant);
}

void require_step(double s) {
  if (!(s >= 0.0)) throw std::domain_error(fmt::format("step count must be >= 0, got {}", s));
}

}  // namespace

void validate(const SystemConfig& c) {
  require(!c.ues.empty(), "ues", "N >= 1");
  for (std::size_t n = 0; n < c.ues.size(); ++n) {
    const auto& ue = c.ues[n];
    const auto f = [n](const char* name) { return fmt::format("ues[{}].{}", n, name); };
    require(ue.delta_t_local > 0, f("delta_t_local"), "delta_t_local > 0");
    require(ue.delta_t_edge > 0, f("delta_t_edge"), "delta_t_edge > 0");
    require(ue.c1_attenuation > 0, f("c1_attenuation"), "c1_attenuation > 0");
    require(ue.c2_utility >= 0, f("c2_utility"), "c2_utility >= 0");
    require(ue.cpu_freq_local >= 0, f("cpu_freq_local"), "cpu_freq_local >= 0");
    require(ue.cpu_freq_edge_alloc >= 0, f("cpu_freq_edge_alloc"), "cpu_freq_edge_alloc >= 0");
    require(ue.k_local >= 0, f("k_local"), "k_local >= 0");
    require(ue.s_cap_local > 0, f("s_cap_local"), "s_cap_local > 0");
    require(ue.s_cap_edge > 0, f("s_cap_edge"), "s_cap_edge > 0");
  }
  require(c.k_edge >= 0, "k_edge", "k_edge >= 0");
  require(c.s_edge_budget >= 0, "s_edge_budget", "s_edge_budget >= 0");
  require(c.eps_fwd > 0 && c.eps_fwd <= 1, "eps_fwd", "eps_fwd in (0, 1]");
  require(c.cost_weights.time >= 0, "cost_weights", "all weights >= 0");
  require(c.cost_weights.error >= 0, "cost_weights", "all weights >= 0");
  require(c.cost_weights.energy >= 0, "cost_weights", "all weights >= 0");
  require(c.blend_weights.cost >= 0, "blend_weights", "all weights >= 0");
  require(c.blend_weights.utility >= 0, "blend_weights", "all weights >= 0");
  require(c.tau_penalty > 0, "tau_penalty", "tau_penalty > 0");

  const auto& t = c.tolerances;
  require(t.inner >= 0, "tolerances.inner", "inner >= 0");
  require(t.outer >= 0, "tolerances.outer", "outer >= 0");
  require(t.bisection > 0, "tolerances.bisection", "bisection > 0");
  require(t.max_inner >= 1, "tolerances.max_inner", "max_inner >= 1");
  require(t.max_outer >= 1, "tolerances.max_outer", "max_outer >= 1");
  require(t.aux_floor > 0, "tolerances.aux_floor", "aux_floor > 0");
  require(t.bisection_max_iter >= 1, "tolerances.bisection_max_iter", "bisection_max_iter >= 1");
  require(c.init.a0 >= 0 && c.init.a0 <= 1, "init.a0", "a0 in [0, 1]");
  require(!c.init.s0 || *c.init.s0 >= 0, "init.s0", "s0 >= 0");
  require(c.init.starts >= 1, "init.starts", "starts >= 1");
}

Model::Model(SystemConfig config) : config_(std::move(config)) {
  validate(config_);
  if (config_.allow_nonpositive_cost) return;
  for (std::size_t n = 0; n < size(); ++n) {
    if (!(min_net_cost(*this, n) > 0.0)) {
      throw ConfigError(fmt::format("ues[{}]", n),
                        "R_{n,r}(s) > 0 for all s in [0, max(s_cap_local, s_cap_edge)]");
    }
  }
}

double Model::computation_time(std::size_t n, double s, Mode mode) const {
  require_step(s);
  const auto& u = ue(n);
  return s * (mode == Mode::kLocal ? u.delta_t_local : u.delta_t_edge);
}

double Model::average_error(std::size_t n, double s) const {
  require_step(s);
  return config_.eps_fwd * std::exp(-s * ue(n).c1_attenuation);
}

double Model::energy(std::size_t n, double s, Mode mode) const {
  const auto& u = ue(n);
  const double t = computation_time(n, s, mode);
  if (mode == Mode::kLocal) return u.k_local * t * std::pow(u.cpu_freq_local, 3);
  return config_.k_edge * t * std::pow(u.cpu_freq_edge_alloc, 3);
}

double Model::utility(std::size_t n, double s) const {
  require_step(s);
  return -std::expm1(-s * ue(n).c2_utility);
}

double Model::net_cost(std::size_t n, double s, Mode mode) const {
  const auto& w = config_.cost_weights;
  const auto& b = config_.blend_weights;
  const double cost =
      w.time * computation_time(n, s, mode) + w.error * average_error(n, s) + w.energy * energy(n, s, mode);
  return b.cost * cost - b.utility * utility(n, s);
}

double Model::net_cost_derivative(std::size_t n, double s, Mode mode) const {
  require_step(s);
  const auto& u = ue(n);
  const auto& w = config_.cost_weights;
  const auto& b = config_.blend_weights;
  const double dt = mode == Mode::kLocal ? u.delta_t_local : u.delta_t_edge;
  const double de = mode == Mode::kLocal ? u.k_local * dt * std::pow(u.cpu_freq_local, 3)
                                         : config_.k_edge * dt * std::pow(u.cpu_freq_edge_alloc, 3);
  const double derr = -u.c1_attenuation * config_.eps_fwd * std::exp(-u.c1_attenuation * s);
  const double dutil = u.c2_utility * std::exp(-u.c2_utility * s);
  return b.cost * (w.time * dt + w.error * derr + w.energy * de) - b.utility * dutil;
}

double Model::step_cap(std::size_t n, double a) const {
  return (1.0 - a) * ue(n).s_cap_local + a * ue(n).s_cap_edge;
}

double Model::step_upper(std::size_t n) const {
  return std::max(ue(n).s_cap_local, ue(n).s_cap_edge);
}

void Model::check_dims(const Allocation& alloc) const {
  if (alloc.a.size() != size() || alloc.s.size() != size()) {
    throw std::invalid_argument(fmt::format("allocation has {}/{} entries, config has N = {}",
                                            alloc.a.size(), alloc.s.size(), size()));
  }
}

double Model::objective(const Allocation& alloc) const {
  check_dims(alloc);
  double total = 0.0;
  for (std::size_t n = 0; n < size(); ++n) {
    const double a = alloc.a[n];
    const double s = alloc.s[n];
    // skip the weighted-out branch so binary a never touches it
    if (a != 1.0) total += (1.0 - a) * net_cost(n, s, Mode::kLocal);
    if (a != 0.0) total += a * net_cost(n, s, Mode::kEdge);
  }
  return total;
}

FeasibilityReport Model::check_feasibility(const Allocation& alloc, double tol) const {
  check_dims(alloc);
  FeasibilityReport r;
  r.cap_slack.resize(size());
  double edge_load = 0.0;
  for (std::size_t n = 0; n < size(); ++n) {
    const double a = alloc.a[n];
    const double s = alloc.s[n];
    if (!(a >= 0.0 && a <= 1.0)) r.a_in_box = false;
    if (!(s >= 0.0)) r.s_nonnegative = false;
    edge_load += a * s;
    r.cap_slack[n] = step_cap(n, a) - s;
    if (r.cap_slack[n] < -tol) r.cap_violations.push_back(n);
  }
  r.edge_slack = config_.s_edge_budget - edge_load;
  r.feasible = r.a_in_box && r.s_nonnegative && r.cap_violations.empty() && r.edge_slack >= -tol;
  return r;
}

double min_net_cost(const Model& model, std::size_t n) {
  // R is convex in s, so its minimum over the box sits at an endpoint or at the
  // root of the monotone derivative.
  const double hi = model.step_upper(n);
  double best = std::numeric_limits<double>::infinity();
  for (Mode mode : {Mode::kLocal, Mode::kEdge}) {
    double lo_s = 0.0;
    double hi_s = hi;
    if (model.net_cost_derivative(n, 0.0, mode) >= 0.0) {
      hi_s = 0.0;
    } else if (model.net_cost_derivative(n, hi, mode) <= 0.0) {
      lo_s = hi;
    } else {
      for (int it = 0; it < 200 && hi_s - lo_s > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo_s + hi_s);
        (model.net_cost_derivative(n, mid, mode) < 0.0 ? lo_s : hi_s) = mid;
      }
    }
    best = std::min({best, model.net_cost(n, lo_s, mode), model.net_cost(n, hi_s, mode),
                     model.net_cost(n, 0.0, mode), model.net_cost(n, hi, mode)});
  }
  return best;
}

const char* to_string(WeightPreset preset) {
  switch (preset) {
    case WeightPreset::kEqual: return "equal";
    case WeightPreset::kTimeHeavy: return "time-heavy";
    case WeightPreset::kErrorHeavy: return "error-heavy";
    case WeightPreset::kEnergyHeavy: return "energy-heavy";
  }
  return "?";
}

std::optional<WeightPreset> parse_weight_preset(const std::string& name) {
  for (auto p : {WeightPreset::kEqual, WeightPreset::kTimeHeavy, WeightPreset::kErrorHeavy,
                 WeightPreset::kEnergyHeavy}) {
    if (name == to_string(p)) return p;
  }
  return std::nullopt;
}

CostWeights normalized_cost_weights(const std::vector<UeProfile>& ues, double eps_fwd,
                                    WeightPreset preset) {
  if (ues.empty()) throw std::invalid_argument("normalized_cost_weights: empty UE list");
  double t_ref = 0.0;
  double e_ref = 0.0;
  double err_ref = 0.0;
  for (const auto& ue : ues) {
    const double s = 0.5 * ue.s_cap_local;
    const double t = s * ue.delta_t_local;
    t_ref += t;
    err_ref += eps_fwd * std::exp(-s * ue.c1_attenuation);
    e_ref += ue.k_local * t * std::pow(ue.cpu_freq_local, 3);
  }
  const double inv_n = 1.0 / static_cast<double>(ues.size());
  t_ref *= inv_n;
  err_ref *= inv_n;
  e_ref *= inv_n;
  if (!(t_ref > 0 && err_ref > 0 && e_ref > 0)) {
    throw std::invalid_argument("normalized_cost_weights: a reference component is zero");
  }
  CostWeights w{1.0 / t_ref, 1.0 / err_ref, 1.0 / e_ref};
  switch (preset) {
    case WeightPreset::kEqual: break;
    case WeightPreset::kTimeHeavy: w.time *= 5.0; break;
    case WeightPreset::kErrorHeavy: w.error *= 5.0; break;
    case WeightPreset::kEnergyHeavy: w.energy *= 5.0; break;
  }
  return w;
}

}  // namespace diffstep
