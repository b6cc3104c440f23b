#include "optforge/analysis/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "optforge/analysis/code_vector.hpp"
#include "optforge/dataio.hpp"

namespace optforge {

BoBounds default_bounds(const std::vector<std::vector<double>>& X) {
  if (X.empty()) throw std::invalid_argument("bounds need at least one point");
  std::size_t d = X[0].size();
  BoBounds bounds;
  bounds.lo.assign(d, std::numeric_limits<double>::infinity());
  bounds.hi.assign(d, -std::numeric_limits<double>::infinity());
  for (const auto& x : X) {
    if (x.size() != d) throw std::invalid_argument("inconsistent dimension");
    for (std::size_t j = 0; j < d; ++j) {
      bounds.lo[j] = std::min(bounds.lo[j], x[j]);
      bounds.hi[j] = std::max(bounds.hi[j], x[j]);
    }
  }
  double max_range = 0.0;
  for (std::size_t j = 0; j < d; ++j) max_range = std::max(max_range, bounds.hi[j] - bounds.lo[j]);
  for (std::size_t j = 0; j < d; ++j) {
    double range = bounds.hi[j] - bounds.lo[j];
    if (range > 0.0) {
      bounds.lo[j] -= 0.1 * range;
      bounds.hi[j] += 0.1 * range;
    } else {
      double half = std::max(0.1 * max_range, 1.0);
      bounds.lo[j] -= half;
      bounds.hi[j] += half;
    }
  }
  return bounds;
}

namespace {

std::size_t nth_prime(std::size_t n) {
  // Enough primes for any realistic embedding dimension; extend on demand.
  std::vector<std::size_t> primes = {2};
  std::size_t candidate = 3;
  while (primes.size() <= n) {
    bool is_prime = true;
    for (std::size_t p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        is_prime = false;
        break;
      }
    }
    if (is_prime) primes.push_back(candidate);
    candidate += 2;
  }
  return primes[n];
}

double radical_inverse(std::size_t index, std::size_t base) {
  double inv_base = 1.0 / static_cast<double>(base);
  double factor = inv_base;
  double value = 0.0;
  std::size_t i = index + 1;  // skip the all-zero point
  while (i > 0) {
    value += static_cast<double>(i % base) * factor;
    i /= base;
    factor *= inv_base;
  }
  return value;
}

}  // namespace

std::vector<double> halton_point(std::size_t index, std::size_t dims) {
  std::vector<double> point(dims);
  for (std::size_t j = 0; j < dims; ++j) point[j] = radical_inverse(index, nth_prime(j));
  return point;
}

std::vector<std::vector<double>> bo_candidates(const BoBounds& bounds, std::size_t count,
                                               std::uint64_t seed) {
  std::size_t d = bounds.lo.size();
  SplitMix64 rng(seed ^ 0x68616c746f6e2121ull);
  std::vector<double> rotation(d);
  for (double& r : rotation) r = rng.next_double();

  std::vector<std::vector<double>> candidates(count, std::vector<double>(d));
  for (std::size_t i = 0; i < count; ++i) {
    auto h = halton_point(i, d);
    for (std::size_t j = 0; j < d; ++j) {
      double u = h[j] + rotation[j];
      u -= std::floor(u);
      candidates[i][j] = bounds.lo[j] + u * (bounds.hi[j] - bounds.lo[j]);
    }
  }
  return candidates;
}

double median_pairwise_distance(const std::vector<std::vector<double>>& X) {
  std::vector<double> distances;
  distances.reserve(X.size() * (X.size() - 1) / 2);
  for (std::size_t i = 0; i < X.size(); ++i) {
    for (std::size_t j = i + 1; j < X.size(); ++j) {
      distances.push_back(euclidean_distance(X[i], X[j]));
    }
  }
  if (distances.empty()) return 1.0;
  std::size_t mid = (distances.size() - 1) / 2;  // lower median
  std::nth_element(distances.begin(), distances.begin() + mid, distances.end());
  double median = distances[mid];
  return median > 0.0 ? median : 1.0;
}

BoProposal bo_propose(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                      const BoOptions& options) {
  if (X.empty() || X.size() != y.size()) {
    throw std::invalid_argument("bo_propose needs matching non-empty X and y");
  }
  std::size_t n = X.size();
  std::size_t d = X[0].size();
  for (const auto& x : X) {
    if (x.size() != d) throw std::invalid_argument("inconsistent dimension");
  }

  BoBounds bounds = options.bounds.empty() ? default_bounds(X) : options.bounds;
  if (bounds.lo.size() != d || bounds.hi.size() != d) {
    throw std::invalid_argument("bounds dimension mismatch");
  }

  double length_scale = median_pairwise_distance(X);
  double prior_mean = 0.0;
  for (double v : y) prior_mean += v;
  prior_mean /= static_cast<double>(n);

  auto kernel = [length_scale](const std::vector<double>& a, const std::vector<double>& b) {
    double dist = euclidean_distance(a, b);
    return std::exp(-dist * dist / (2.0 * length_scale * length_scale));
  };

  Eigen::MatrixXd gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double v = kernel(X[i], X[j]);
      gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }

  BoProposal proposal;
  double jitter = options.jitter;
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (int attempt = 0;; ++attempt) {
    Eigen::MatrixXd jittered = gram;
    jittered.diagonal().array() += jitter;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) break;
    if (attempt >= 2) {
      throw std::runtime_error("GP covariance not positive definite even with jitter");
    }
    jitter *= 100.0;
    proposal.jitter_escalated = true;
  }

  Eigen::VectorXd residual(n);
  for (std::size_t i = 0; i < n; ++i) {
    residual(static_cast<Eigen::Index>(i)) = y[i] - prior_mean;
  }
  Eigen::VectorXd alpha = llt.solve(residual);

  auto candidates = bo_candidates(bounds, options.candidates, options.seed);
  double best_ucb = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    Eigen::VectorXd k_star(n);
    for (std::size_t i = 0; i < n; ++i) {
      k_star(static_cast<Eigen::Index>(i)) = kernel(candidates[c], X[i]);
    }
    double mean = prior_mean + k_star.dot(alpha);
    Eigen::VectorXd solved = llt.solve(k_star);
    double variance = 1.0 - k_star.dot(solved);
    if (variance < 0.0) variance = 0.0;
    double stddev = std::sqrt(variance);
    double ucb = mean + options.xi * stddev;
    if (ucb > best_ucb) {
      best_ucb = ucb;
      proposal.x = candidates[c];
      proposal.candidate_index = c;
      proposal.ucb = ucb;
      proposal.mean = mean;
      proposal.stddev = stddev;
    }
  }
  return proposal;
}

}  // namespace optforge
