#pragma once

#include <cstdint>
#include <vector>

namespace optforge {

struct KMeansResult {
  std::vector<int> assignment;                 // cluster id per row
  std::vector<std::vector<double>> centroids;  // k rows
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding driven by a SplitMix64 stream.
/// An empty cluster is reseeded with the point farthest from its centroid.
KMeansResult kmeans(const std::vector<std::vector<double>>& points, int k,
                    std::uint64_t seed, int max_iterations = 200);

struct ConsensusOptions {
  int k_min = 2;
  int k_max = 5;
  int runs_per_k = 25;
  double co_occurrence_threshold = 0.10;  // strictly greater than
  std::uint64_t seed = 0;
};

struct ConsensusResult {
  std::vector<int> labels;  // canonical cluster id per row
  int cluster_count = 0;
  std::vector<std::vector<double>> co_occurrence;  // fraction of runs together
};

/// Clusters the points once per (k, run) pair, accumulates how often each
/// pair of points lands in the same cluster, links pairs whose rate exceeds
/// the threshold, and reads clusters off as connected components. Labels are
/// canonical: clusters are numbered by their lowest member index.
ConsensusResult consensus_cluster(const std::vector<std::vector<double>>& points,
                                  const ConsensusOptions& options);

/// Renumbers arbitrary labels into first-appearance order so label
/// permutations compare equal.
std::vector<int> canonical_labels(const std::vector<int>& labels);

}  // namespace optforge
