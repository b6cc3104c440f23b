#pragma once

#include <cstdint>
#include <vector>

namespace optforge {

struct BoBounds {
  std::vector<double> lo;
  std::vector<double> hi;
  bool empty() const { return lo.empty(); }
};

/// Axis-aligned bounding box of the points, each side expanded by 10% of that
/// dimension's range. A dimension with no spread gets a half-width of
/// max(0.1 * largest range, 1.0) instead.
BoBounds default_bounds(const std::vector<std::vector<double>>& X);

struct BoOptions {
  double xi = 2.0;                // exploration factor in UCB = mu + xi*sigma
  std::size_t candidates = 4096;  // Halton draws scored per proposal
  std::uint64_t seed = 0;
  double jitter = 1e-6;
  BoBounds bounds;                // derived from X when left empty
};

struct BoProposal {
  std::vector<double> x;
  std::size_t candidate_index = 0;
  double ucb = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  bool jitter_escalated = false;  // Cholesky needed more than the base jitter
};

/// GP-UCB proposal over the observed designs. Squared-exponential kernel with
/// length scale = median pairwise distance of X (1.0 when degenerate), prior
/// mean = mean(y), unit signal variance. Candidates are a seeded Halton set
/// with a Cranley-Patterson rotation, scaled into the bounds. Ties on the
/// UCB score go to the lowest candidate index. X must be non-empty with a
/// consistent dimension.
BoProposal bo_propose(const std::vector<std::vector<double>>& X,
                      const std::vector<double>& y, const BoOptions& options);

/// The candidate set bo_propose scores, exposed so an exhaustive oracle can
/// replay the argmax over the exact same points.
std::vector<std::vector<double>> bo_candidates(const BoBounds& bounds,
                                               std::size_t count, std::uint64_t seed);

/// Halton sequence point `index` (0-based) in `dims` dimensions, coordinates
/// in [0,1). Bases are the first `dims` primes.
std::vector<double> halton_point(std::size_t index, std::size_t dims);

/// Median pairwise Euclidean distance; 1.0 when fewer than two distinct
/// points exist.
double median_pairwise_distance(const std::vector<std::vector<double>>& X);

}  // namespace optforge
