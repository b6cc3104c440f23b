#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace optforge {

/// Bag-of-words features for one artifact: every C++ keyword occurrence plus
/// every identifier that directly precedes a '(' (call-ish names). String and
/// char literals and comments are skipped before counting.
std::vector<std::string> code_tokens(const std::string& source);

struct Embedding {
  std::vector<std::string> vocabulary;       // sorted union over the corpus
  std::vector<std::vector<double>> vectors;  // one row per artifact, counts
};

/// Embeds a corpus into count vectors over the shared sorted vocabulary.
/// Artifacts map to rows in input order; an empty corpus yields an empty
/// vocabulary.
Embedding embed_corpus(const std::vector<std::string>& sources);

/// Projects rows of `vectors` onto their top `dims` principal components
/// (covariance eigenvectors, largest eigenvalues first). Rows are centered
/// first; requested dims beyond the available rank come back as zeros.
/// Component signs are fixed so each component's largest-magnitude loading
/// is positive.
std::vector<std::vector<double>> pca_project(const std::vector<std::vector<double>>& vectors,
                                             std::size_t dims);

double euclidean_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace optforge
