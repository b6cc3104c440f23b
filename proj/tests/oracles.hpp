#pragma once

// Independent re-derivations of the analysis geometry, used to cross-check
// the library: a monotone-chain hull instead of the simplex feasibility
// solve, and a Gaussian-elimination GP instead of the Cholesky path.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "optforge/analysis/bayesopt.hpp"
#include "optforge/analysis/code_vector.hpp"
#include "optforge/analysis/phi.hpp"

namespace optforge::testing {

using Point2 = std::array<double, 2>;

inline double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline std::vector<Point2> convex_hull(std::vector<Point2> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::size_t n = pts.size();
  if (n < 3) return pts;
  std::vector<Point2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

inline double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  double vx = b[0] - a[0], vy = b[1] - a[1];
  double wx = p[0] - a[0], wy = p[1] - a[1];
  double vv = vx * vx + vy * vy;
  double t = vv > 0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
  double dx = p[0] - (a[0] + t * vx), dy = p[1] - (a[1] + t * vy);
  return std::hypot(dx, dy);
}

inline bool oracle_in_hull(const Point2& p, const std::vector<Point2>& pts) {
  auto hull = convex_hull(pts);
  if (hull.empty()) return false;
  if (hull.size() == 1) return std::hypot(p[0] - hull[0][0], p[1] - hull[0][1]) <= 1e-12;
  if (hull.size() == 2) return point_segment_distance(p, hull[0], hull[1]) <= 1e-12;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Point2& a = hull[i];
    const Point2& b = hull[(i + 1) % hull.size()];
    if (cross(a, b, p) < -1e-9) return false;
  }
  return true;
}

inline Phase oracle_phase(const Point2& p, const std::vector<Point2>& pts) {
  double l = 0.0;
  double dmin = std::numeric_limits<double>::infinity();
  for (const Point2& c : pts) {
    l = std::max(l, std::max(std::abs(c[0]), std::abs(c[1])));
    dmin = std::min(dmin, std::hypot(p[0] - c[0], p[1] - c[1]));
  }
  if (dmin <= 0.1 * l || oracle_in_hull(p, pts)) return Phase::Exploitation;
  return Phase::Exploration;
}

inline std::vector<std::vector<double>> to_context(const std::vector<Point2>& pts) {
  std::vector<std::vector<double>> out;
  for (const Point2& p : pts) out.push_back({p[0], p[1]});
  return out;
}

inline std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                        std::vector<double> b) {
  std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t row = n; row-- > 0;) {
    double s = b[row];
    for (std::size_t c = row + 1; c < n; ++c) s -= a[row][c] * x[c];
    x[row] = s / a[row][row];
  }
  return x;
}

struct OracleProposal {
  std::size_t index = 0;
  double ucb = 0.0;
};

inline OracleProposal oracle_propose(const std::vector<std::vector<double>>& X,
                                     const std::vector<double>& y,
                                     const std::vector<std::vector<double>>& candidates,
                                     double xi, double jitter) {
  std::size_t n = X.size();
  std::vector<double> dists;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) dists.push_back(euclidean_distance(X[i], X[j]));
  double ell = 1.0;
  if (!dists.empty()) {
    std::sort(dists.begin(), dists.end());
    double lower_median = dists[(dists.size() - 1) / 2];
    if (lower_median > 0.0) ell = lower_median;
  }
  auto kern = [ell](const std::vector<double>& a, const std::vector<double>& b) {
    double d = euclidean_distance(a, b);
    return std::exp(-d * d / (2.0 * ell * ell));
  };
  double mean_y = 0.0;
  for (double v : y) mean_y += v;
  mean_y /= static_cast<double>(n);

  std::vector<std::vector<double>> gram(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) gram[i][j] = kern(X[i], X[j]);
    gram[i][i] += jitter;
  }
  std::vector<double> residual(n);
  for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - mean_y;
  std::vector<double> alpha = solve_linear(gram, residual);

  OracleProposal best;
  double best_ucb = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    std::vector<double> k_star(n);
    for (std::size_t i = 0; i < n; ++i) k_star[i] = kern(candidates[c], X[i]);
    double mu = mean_y;
    for (std::size_t i = 0; i < n; ++i) mu += k_star[i] * alpha[i];
    std::vector<double> solved = solve_linear(gram, k_star);
    double variance = 1.0;
    for (std::size_t i = 0; i < n; ++i) variance -= k_star[i] * solved[i];
    double ucb = mu + xi * std::sqrt(std::max(variance, 0.0));
    if (ucb > best_ucb) {
      best_ucb = ucb;
      best.index = c;
      best.ucb = ucb;
    }
  }
  return best;
}

}  // namespace optforge::testing
