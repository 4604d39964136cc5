#include "diffstep/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace diffstep {

namespace {

// R_{n,r} sampled on {0, h, ..., floor(cap / h) h}.
struct GridTables {
  double step = 1.0;
  std::vector<std::vector<double>> local;
  std::vector<std::vector<double>> edge;
  std::vector<std::size_t> local_best;  // argmin index of `local[n]`

  GridTables(const Model& model, double h) : step(h) {
    const std::size_t N = model.size();
    local.resize(N);
    edge.resize(N);
    local_best.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
      fill(model, n, Mode::kLocal, model.ue(n).s_cap_local, local[n]);
      fill(model, n, Mode::kEdge, model.ue(n).s_cap_edge, edge[n]);
      local_best[n] = static_cast<std::size_t>(
          std::min_element(local[n].begin(), local[n].end()) - local[n].begin());
    }
  }

  void fill(const Model& model, std::size_t n, Mode mode, double cap, std::vector<double>& out) const {
    const auto points = static_cast<std::size_t>(std::floor(cap / step + 1e-9)) + 1;
    out.resize(points);
    for (std::size_t k = 0; k < points; ++k) out[k] = model.net_cost(n, step * k, mode);
  }
};

struct EdgeSolution {
  std::vector<std::size_t> index;  // grid index per offloaded UE
  double cost = 0.0;
  bool exhaustive = true;
};

class ProductSearch {
 public:
  ProductSearch(const GridTables& g, const std::vector<std::size_t>& set, std::size_t budget_steps)
      : g_(g), set_(set), budget_(budget_steps), cur_(set.size()) {}

  EdgeSolution run() {
    recurse(0, 0, 0.0);
    return {best_, best_cost_, true};
  }

 private:
  void recurse(std::size_t depth, std::size_t used, double cost) {
    if (depth == set_.size()) {
      if (cost < best_cost_) {
        best_cost_ = cost;
        best_ = cur_;
      }
      return;
    }
    const auto& table = g_.edge[set_[depth]];
    const std::size_t room = std::min(table.size() - 1, budget_ - used);
    for (std::size_t k = 0; k <= room; ++k) {
      cur_[depth] = k;
      recurse(depth + 1, used + k, cost + table[k]);
    }
  }

  const GridTables& g_;
  const std::vector<std::size_t>& set_;
  std::size_t budget_;
  std::vector<std::size_t> cur_;
  std::vector<std::size_t> best_;
  double best_cost_ = std::numeric_limits<double>::infinity();
};

// Lagrangian relaxation of the shared budget: each UE minimizes R + lambda s on
// its grid; lambda is bisected until the load fits, then any whole grid steps
// left over go to the most negative marginal costs.
EdgeSolution dual_search(const GridTables& g, const std::vector<std::size_t>& set,
                         std::size_t budget_steps) {
  const auto respond = [&](double lambda, std::vector<std::size_t>& idx) {
    std::size_t load = 0;
    for (std::size_t j = 0; j < set.size(); ++j) {
      const auto& table = g.edge[set[j]];
      std::size_t best = 0;
      for (std::size_t k = 1; k < table.size(); ++k) {
        if (table[k] + lambda * g.step * k < table[best] + lambda * g.step * best) best = k;
      }
      idx[j] = best;
      load += best;
    }
    return load;
  };

  std::vector<std::size_t> idx(set.size());
  if (respond(0.0, idx) > budget_steps) {
    double lo = 0.0;
    double hi = 1.0;
    for (int d = 0; d < 200 && respond(hi, idx) > budget_steps; ++d) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      (respond(mid, idx) > budget_steps ? lo : hi) = mid;
    }
    std::size_t load = respond(hi, idx);
    while (load < budget_steps) {
      std::size_t pick = set.size();
      double gain = 0.0;
      for (std::size_t j = 0; j < set.size(); ++j) {
        const auto& table = g.edge[set[j]];
        if (idx[j] + 1 >= table.size()) continue;
        const double d = table[idx[j] + 1] - table[idx[j]];
        if (d < gain) {
          gain = d;
          pick = j;
        }
      }
      if (pick == set.size()) break;
      ++idx[pick];
      ++load;
    }
  }
  EdgeSolution out{idx, 0.0, false};
  for (std::size_t j = 0; j < set.size(); ++j) out.cost += g.edge[set[j]][idx[j]];
  return out;
}

FixedAssignmentResult solve_assignment(const Model& model, const GridTables& g,
                                       std::span<const int> a) {
  const std::size_t N = model.size();
  FixedAssignmentResult out;
  out.s.assign(N, 0.0);
  std::vector<std::size_t> set;
  double product = 1.0;
  for (std::size_t n = 0; n < N; ++n) {
    if (a[n] == 1) {
      set.push_back(n);
      product *= static_cast<double>(g.edge[n].size());
    } else {
      out.s[n] = g.step * g.local_best[n];
      out.objective += g.local[n][g.local_best[n]];
    }
  }
  if (set.empty()) return out;

  const auto budget_steps =
      static_cast<std::size_t>(std::floor(model.config().s_edge_budget / g.step + 1e-9));
  EdgeSolution edge = product <= kOracleMaxProductGrid ? ProductSearch(g, set, budget_steps).run()
                                                       : dual_search(g, set, budget_steps);
  for (std::size_t j = 0; j < set.size(); ++j) out.s[set[j]] = g.step * edge.index[j];
  out.objective += edge.cost;
  out.exhaustive = edge.exhaustive;
  return out;
}

void check_grid_step(double h) {
  if (!(h > 0.0)) throw std::invalid_argument(fmt::format("grid_step must be > 0, got {}", h));
}

}  // namespace

FixedAssignmentResult inner_fixed_assignment(const Model& model, std::span<const int> a,
                                             double grid_step) {
  check_grid_step(grid_step);
  if (a.size() != model.size()) throw std::invalid_argument("inner_fixed_assignment: size mismatch");
  return solve_assignment(model, GridTables(model, grid_step), a);
}

OracleResult brute_force(const Model& model, double grid_step) {
  check_grid_step(grid_step);
  const std::size_t N = model.size();
  if (N > kOracleMaxUes) {
    throw std::invalid_argument(
        fmt::format("brute_force supports N <= {}, got N = {}", kOracleMaxUes, N));
  }
  const GridTables g(model, grid_step);
  OracleResult best;
  best.best_objective = std::numeric_limits<double>::infinity();
  int best_count = 0;
  std::vector<int> a(N);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << N); ++mask) {
    int count = 0;
    for (std::size_t n = 0; n < N; ++n) {
      a[n] = static_cast<int>((mask >> n) & 1U);
      count += a[n];
    }
    FixedAssignmentResult r = solve_assignment(model, g, a);
    ++best.assignments_evaluated;
    const bool better =
        r.objective < best.best_objective ||
        (r.objective == best.best_objective &&
         (count < best_count || (count == best_count && a < best.best_a)));
    if (better) {
      best.best_objective = r.objective;
      best.best_a = a;
      best.best_s = std::move(r.s);
      best_count = count;
    }
  }
  return best;
}

}  // namespace diffstep
