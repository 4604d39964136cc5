#pragma once

#include <vector>

#include "diffstep/model.hpp"
#include "diffstep/random.hpp"

namespace testing {

// One UE with the default constants and plain unit weights.
inline diffstep::SystemConfig unit_config(std::size_t n = 1) {
  diffstep::SystemConfig c;
  c.ues.assign(n, diffstep::UeProfile{});
  c.cost_weights = {1.0, 1.0, 1.0};
  c.blend_weights = {1.0, 0.0};
  return c;
}

// Time-only cost with R0(s) = dt0 * s and R1(s) = dt1 * s. R(0) = 0, so the
// positivity scan is skipped.
inline diffstep::SystemConfig time_only_config(double dt0, double dt1, std::size_t n = 1) {
  diffstep::SystemConfig c = unit_config(n);
  for (auto& ue : c.ues) {
    ue.delta_t_local = dt0;
    ue.delta_t_edge = dt1;
  }
  c.cost_weights = {1.0, 0.0, 0.0};
  c.allow_nonpositive_cost = true;
  return c;
}

// Energy almost free and a light utility term: the faster edge branch wins
// and R stays positive everywhere.
inline diffstep::SystemConfig edge_friendly_config(std::size_t n = 1) {
  diffstep::SystemConfig c = unit_config(n);
  c.cost_weights = {1.0, 1.0, 1e-5};
  c.blend_weights = {0.9, 0.1};
  return c;
}

inline diffstep::Allocation random_allocation(const diffstep::Model& model, diffstep::Rng& rng) {
  diffstep::Allocation x;
  for (std::size_t n = 0; n < model.size(); ++n) {
    x.a.push_back(rng.uniform(0.05, 0.95));
    x.s.push_back(rng.uniform(1.0, model.step_cap(n, x.a.back())));
  }
  return x;
}

}  // namespace testing
