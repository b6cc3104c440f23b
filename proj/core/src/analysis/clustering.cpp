#include "optforge/analysis/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "optforge/analysis/code_vector.hpp"
#include "optforge/dataio.hpp"

namespace optforge {

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

std::vector<std::vector<double>> kmeanspp_seeds(const std::vector<std::vector<double>>& points,
                                                int k, SplitMix64& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[rng.next_u64() % points.size()]);
  std::vector<double> best_sq(points.size());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) nearest = std::min(nearest, sq_distance(points[i], c));
      best_sq[i] = nearest;
      total += nearest;
    }
    if (total <= 0.0) {
      // All remaining mass sits on existing centroids; any point works.
      centroids.push_back(points[rng.next_u64() % points.size()]);
      continue;
    }
    double draw = rng.next_double() * total;
    std::size_t chosen = points.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      acc += best_sq[i];
      if (acc >= draw) {
        chosen = i;
        break;
      }
    }
    centroids.push_back(points[chosen]);
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iterations) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (points.empty() || static_cast<std::size_t>(k) > points.size()) {
    throw std::invalid_argument("k must not exceed the number of points");
  }
  SplitMix64 rng(seed);
  KMeansResult result;
  result.centroids = kmeanspp_seeds(points, k, rng);
  result.assignment.assign(points.size(), 0);

  for (int round = 0; round < max_iterations; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      int best = 0;
      double best_sq = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        double d = sq_distance(points[i], result.centroids[c]);
        if (d < best_sq) {
          best_sq = d;
          best = c;
        }
      }
      if (result.assignment[i] != best) {
        result.assignment[i] = best;
        changed = true;
      }
    }

    std::vector<std::vector<double>> sums(k, std::vector<double>(points[0].size(), 0.0));
    std::vector<int> sizes(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      int c = result.assignment[i];
      ++sizes[c];
      for (std::size_t j = 0; j < points[i].size(); ++j) sums[c][j] += points[i][j];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        for (double& v : sums[c]) v /= sizes[c];
        result.centroids[c] = sums[c];
        continue;
      }
      // Empty cluster: reseed from the point farthest from its own centroid.
      std::size_t farthest = 0;
      double farthest_sq = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        double d = sq_distance(points[i], result.centroids[result.assignment[i]]);
        if (d > farthest_sq) {
          farthest_sq = d;
          farthest = i;
        }
      }
      result.centroids[c] = points[farthest];
      result.assignment[farthest] = c;
      changed = true;
    }
    if (!changed && round > 0) break;
  }

  result.inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    result.inertia += sq_distance(points[i], result.centroids[result.assignment[i]]);
  }
  return result;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::vector<int> mapping;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int label = labels[i];
    int found = -1;
    for (std::size_t m = 0; m < mapping.size(); ++m) {
      if (mapping[m] == label) {
        found = static_cast<int>(m);
        break;
      }
    }
    if (found < 0) {
      found = static_cast<int>(mapping.size());
      mapping.push_back(label);
    }
    out[i] = found;
  }
  return out;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void merge(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

ConsensusResult consensus_cluster(const std::vector<std::vector<double>>& points,
                                  const ConsensusOptions& options) {
  if (options.k_min < 1 || options.k_max < options.k_min) {
    throw std::invalid_argument("bad k range");
  }
  if (options.runs_per_k < 1) throw std::invalid_argument("runs_per_k must be >= 1");

  std::size_t n = points.size();
  ConsensusResult result;
  result.co_occurrence.assign(n, std::vector<double>(n, 0.0));
  if (n == 0) return result;

  // No run may ask for more clusters than there are distinct points, or the
  // empty-cluster reseed would manufacture splits between identical rows.
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j) {
      if (points[i] == points[j]) {
        seen = true;
        break;
      }
    }
    if (!seen) ++distinct;
  }

  SplitMix64 seeder(options.seed ^ 0x636f6e73656e7375ull);
  int total_runs = 0;
  for (int k = options.k_min; k <= options.k_max; ++k) {
    int usable_k = std::min<int>(k, static_cast<int>(distinct));
    for (int run = 0; run < options.runs_per_k; ++run) {
      auto labels = kmeans(points, usable_k, seeder.next_u64()).assignment;
      ++total_runs;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
          if (labels[i] == labels[j]) result.co_occurrence[i][j] += 1.0;
        }
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      result.co_occurrence[i][j] /= total_runs;
      result.co_occurrence[j][i] = result.co_occurrence[i][j];
    }
  }

  UnionFind components(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (result.co_occurrence[i][j] > options.co_occurrence_threshold) {
        components.merge(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  std::vector<int> roots(n);
  for (std::size_t i = 0; i < n; ++i) roots[i] = components.find(static_cast<int>(i));
  result.labels = canonical_labels(roots);
  result.cluster_count =
      result.labels.empty() ? 0 : *std::max_element(result.labels.begin(), result.labels.end()) + 1;
  return result;
}

}  // namespace optforge
