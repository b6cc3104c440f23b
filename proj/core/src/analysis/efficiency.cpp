#include "optforge/analysis/efficiency.hpp"

#include "optforge/analysis/code_vector.hpp"
#include "optforge/dataio.hpp"

namespace optforge {

EfficiencyReport search_efficiency(const Trace& trace, const EfficiencyOptions& options) {
  EfficiencyReport report;

  std::vector<const DesignRecord*> coders;
  std::vector<std::string> sources;
  for (const auto& r : trace.records) {
    if (!r.produced_code()) continue;
    coders.push_back(&r);
    sources.push_back(*r.artifact);
  }
  Embedding embedding = embed_corpus(sources);
  std::vector<std::vector<double>> vectors = embedding.vectors;
  if (options.pca_dims > 0) vectors = pca_project(vectors, options.pca_dims);

  std::vector<std::vector<double>> context;       // prior design points for Phi
  std::vector<std::vector<double>> observations;  // prior scored points for the GP
  std::vector<double> scores;

  std::size_t next_coder = 0;
  int agreement_sum = 0;
  for (const auto& r : trace.records) {
    EfficiencyRow row;
    row.iteration = r.iteration;

    const std::vector<double>* vector = nullptr;
    if (next_coder < coders.size() && coders[next_coder] == &r) {
      vector = &vectors[next_coder];
      ++next_coder;
    }

    bool actual_strategy = r.strategy != Strategy::NotAvailable;
    if (vector && actual_strategy && !context.empty() && !observations.empty()) {
      row.included = true;
      row.strategist =
          r.strategy == Strategy::Innovate ? Phase::Exploration : Phase::Exploitation;
      row.implementor = classify_phase(*vector, context);

      BoOptions bo;
      bo.xi = options.xi;
      bo.candidates = options.bo_candidates;
      bo.seed = SplitMix64(options.seed ^ static_cast<std::uint64_t>(r.iteration)).next_u64();
      auto proposal = bo_propose(observations, scores, bo);
      row.baseline = classify_phase(proposal.x, context);

      row.agree_baseline = row.strategist == row.baseline ? 1 : 0;
      row.agree_implementor = row.strategist == row.implementor ? 1 : 0;
      agreement_sum += row.agree_baseline + row.agree_implementor;
      ++report.counted;
    }
    report.rows.push_back(row);

    if (vector) {
      if (!options.valid_only_context || r.validation.valid()) context.push_back(*vector);
      if (r.validation.valid() && r.score) {
        observations.push_back(*vector);
        scores.push_back(*r.score);
      }
    }
  }

  if (report.counted > 0) {
    report.efficiency_percent =
        100.0 * static_cast<double>(agreement_sum) / (2.0 * static_cast<double>(report.counted));
  }
  return report;
}

}  // namespace optforge
