#pragma once

#include <cstdint>
#include <vector>

#include "optforge/trace.hpp"

namespace optforge {

struct DistancePoint {
  std::int64_t iteration = 0;
  double value = 0.0;
};

/// Relative embedding movement between consecutive code-producing designs:
/// ||v_t - v_prev|| / ||v_prev||. The first code-producing design has no
/// predecessor and is omitted; a zero-norm predecessor yields the absolute
/// distance instead.
std::vector<DistancePoint> relative_distance_curve(const Trace& trace);

/// Best-so-far quality as a percentage of the run's final best:
/// (2 - min_{i<=t} r_i / min_{i<=n} r_i) * 100 over valid designs, where r_i
/// is the geometric-mean runtime (the negated score). 100 marks the point the
/// final best first appears; earlier values sit below 100.
std::vector<DistancePoint> best_solution_curve(const Trace& trace);

}  // namespace optforge
