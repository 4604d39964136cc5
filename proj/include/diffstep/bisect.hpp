#pragma once

#include <cmath>

namespace diffstep {

struct BisectResult {
  double lo;  // last point with f > 0 (for decreasing f) / f < 0 (increasing)
  double hi;
  int iterations;
};

/// Bisection on a bracket [lo, hi] of a monotone function whose sign at `lo`
/// differs from its sign at `hi`. `on_lo(f(x))` tells which side x belongs to.
/// Stops when `done(f(x))` holds, when the bracket collapses to adjacent
/// doubles, or after `max_iter` halvings; `lo`/`hi` keep their sides.
template <class F, class OnLo, class Done>
BisectResult bisect(F&& f, double lo, double hi, OnLo&& on_lo, Done&& done, int max_iter) {
  int it = 0;
  for (; it < max_iter; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi)) break;
    const double fm = f(mid);
    if (done(fm)) return {mid, mid, it + 1};
    if (on_lo(fm)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi, it};
}

}  // namespace diffstep
