#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "optforge/analysis/bayesopt.hpp"
#include "optforge/analysis/phi.hpp"
#include "optforge/trace.hpp"

namespace optforge {

struct EfficiencyOptions {
  double xi = 2.0;                  // UCB exploration factor
  bool valid_only_context = false;  // restrict the context set to valid designs
  std::size_t pca_dims = 0;         // 0 = raw code vectors
  std::uint64_t seed = 0;
  std::size_t bo_candidates = 4096;
};

struct EfficiencyRow {
  std::int64_t iteration = 0;
  bool included = false;
  Phase strategist = Phase::Exploration;    // declared: innovate explores,
                                            // refine and combine exploit
  Phase implementor = Phase::Exploration;   // Phi on the produced artifact
  Phase baseline = Phase::Exploration;      // Phi on the GP-UCB proposal
  int agree_baseline = 0;                   // strategist vs baseline
  int agree_implementor = 0;                // strategist vs implementor
};

struct EfficiencyReport {
  std::vector<EfficiencyRow> rows;   // one per trace record, in order
  std::int64_t counted = 0;          // iterations included in the average
  std::optional<double> efficiency_percent;  // 100/(2n) * sum of agreements;
                                             // absent when nothing counted
};

/// Scores how well the strategist's declared moves track both the produced
/// code and a GP-UCB baseline. Artifacts are embedded over the whole-trace
/// vocabulary; iteration t counts when it produced code under an actual
/// strategy, its context set (embeddings of earlier code-producing designs,
/// valid-only when requested) is non-empty, and at least one earlier design
/// carries a score for the baseline GP to fit. The baseline proposal for
/// iteration t uses seed splitmix(seed xor t) and bounds derived from the
/// fitted observations.
EfficiencyReport search_efficiency(const Trace& trace, const EfficiencyOptions& options);

}  // namespace optforge
