#include "optforge/analysis/convergence.hpp"

#include <cmath>
#include <limits>

#include "optforge/analysis/code_vector.hpp"

namespace optforge {

namespace {

double l2_norm(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

}  // namespace

std::vector<DistancePoint> relative_distance_curve(const Trace& trace) {
  std::vector<const DesignRecord*> coders;
  std::vector<std::string> sources;
  for (const auto& r : trace.records) {
    if (!r.produced_code()) continue;
    coders.push_back(&r);
    sources.push_back(*r.artifact);
  }
  Embedding embedding = embed_corpus(sources);

  std::vector<DistancePoint> curve;
  for (std::size_t i = 1; i < coders.size(); ++i) {
    const auto& prev = embedding.vectors[i - 1];
    const auto& curr = embedding.vectors[i];
    double prev_norm = l2_norm(prev);
    double distance = euclidean_distance(curr, prev);
    curve.push_back({coders[i]->iteration, prev_norm > 0.0 ? distance / prev_norm : distance});
  }
  return curve;
}

std::vector<DistancePoint> best_solution_curve(const Trace& trace) {
  std::vector<DistancePoint> curve;
  double final_best = std::numeric_limits<double>::infinity();
  for (const auto& r : trace.records) {
    if (r.score) final_best = std::min(final_best, -*r.score);
  }
  if (!std::isfinite(final_best) || final_best <= 0.0) return curve;

  double running_best = std::numeric_limits<double>::infinity();
  for (const auto& r : trace.records) {
    if (r.score) running_best = std::min(running_best, -*r.score);
    if (!std::isfinite(running_best)) continue;  // no valid runtime yet
    curve.push_back({r.iteration, (2.0 - running_best / final_best) * 100.0});
  }
  return curve;
}

}  // namespace optforge
