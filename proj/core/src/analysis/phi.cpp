#include "optforge/analysis/phi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "optforge/analysis/code_vector.hpp"

namespace optforge {

std::string to_string(Phase phase) {
  return phase == Phase::Exploitation ? "exploitation" : "exploration";
}

double max_infinity_norm(const std::vector<std::vector<double>>& context) {
  double best = 0.0;
  for (const auto& point : context) {
    for (double v : point) best = std::max(best, std::abs(v));
  }
  return best;
}

double min_distance(const std::vector<double>& x,
                    const std::vector<std::vector<double>>& context) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& point : context) {
    if (point.size() != x.size()) throw std::invalid_argument("dimension mismatch");
    best = std::min(best, euclidean_distance(x, point));
  }
  return best;
}

namespace {

constexpr double kTol = 1e-9;

/// Phase-1 simplex feasibility for A lambda = b, lambda >= 0, with Bland's
/// rule. Rows are pre-scaled so the 1e-9 tolerance is meaningful across
/// problem magnitudes. Returns true when the artificial objective reaches
/// (near) zero.
bool simplex_feasible(std::vector<std::vector<double>> a, std::vector<double> b) {
  std::size_t rows = a.size();
  std::size_t cols = rows == 0 ? 0 : a[0].size();
  if (rows == 0) return true;

  for (std::size_t r = 0; r < rows; ++r) {
    double scale = std::abs(b[r]);
    for (double v : a[r]) scale = std::max(scale, std::abs(v));
    if (scale > 0.0) {
      for (double& v : a[r]) v /= scale;
      b[r] /= scale;
    }
    if (b[r] < 0.0) {
      for (double& v : a[r]) v = -v;
      b[r] = -b[r];
    }
  }

  // Tableau columns: the lambda variables, then one artificial per row.
  std::size_t total = cols + rows;
  std::vector<std::vector<double>> tab(rows, std::vector<double>(total + 1, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) tab[r][c] = a[r][c];
    tab[r][cols + r] = 1.0;
    tab[r][total] = b[r];
    basis[r] = cols + r;
  }

  // Reduced-cost row for minimizing the artificial sum: z_j - c_j equals the
  // column sum over constraint rows for original columns while artificials
  // are basic.
  std::vector<double> obj(total + 1, 0.0);
  for (std::size_t c = 0; c <= total; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < rows; ++r) sum += tab[r][c];
    obj[c] = sum;
  }
  for (std::size_t r = 0; r < rows; ++r) obj[cols + r] = 0.0;

  for (std::size_t guard = 0; guard < 10000; ++guard) {
    std::size_t entering = total;
    for (std::size_t c = 0; c < total; ++c) {
      if (obj[c] > kTol) {
        entering = c;
        break;  // Bland: lowest-index improving column
      }
    }
    if (entering == total) break;

    std::size_t leaving = rows;
    double best_ratio = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (tab[r][entering] <= kTol) continue;
      double ratio = tab[r][total] / tab[r][entering];
      if (leaving == rows || ratio < best_ratio - kTol ||
          (std::abs(ratio - best_ratio) <= kTol && basis[r] < basis[leaving])) {
        leaving = r;
        best_ratio = ratio;
      }
    }
    if (leaving == rows) break;  // unbounded column cannot happen here, guard anyway

    double pivot = tab[leaving][entering];
    for (double& v : tab[leaving]) v /= pivot;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == leaving) continue;
      double factor = tab[r][entering];
      if (factor == 0.0) continue;
      for (std::size_t c = 0; c <= total; ++c) tab[r][c] -= factor * tab[leaving][c];
    }
    double obj_factor = obj[entering];
    if (obj_factor != 0.0) {
      for (std::size_t c = 0; c <= total; ++c) obj[c] -= obj_factor * tab[leaving][c];
    }
    basis[leaving] = entering;
  }

  double artificial_mass = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] >= cols) artificial_mass += tab[r][total];
  }
  return artificial_mass <= kTol * static_cast<double>(rows + 1);
}

}  // namespace

bool in_convex_hull(const std::vector<double>& x,
                    const std::vector<std::vector<double>>& context) {
  if (context.empty()) return false;
  std::size_t d = x.size();
  for (const auto& point : context) {
    if (point.size() != d) throw std::invalid_argument("dimension mismatch");
  }
  // Feasibility of sum(lambda_i * c_i) = x, sum(lambda_i) = 1, lambda >= 0.
  std::vector<std::vector<double>> a(d + 1, std::vector<double>(context.size()));
  std::vector<double> b(d + 1);
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t i = 0; i < context.size(); ++i) a[r][i] = context[i][r];
    b[r] = x[r];
  }
  for (std::size_t i = 0; i < context.size(); ++i) a[d][i] = 1.0;
  b[d] = 1.0;
  return simplex_feasible(std::move(a), std::move(b));
}

Phase classify_phase(const std::vector<double>& x,
                     const std::vector<std::vector<double>>& context) {
  if (context.empty()) return Phase::Exploration;
  if (min_distance(x, context) <= 0.1 * max_infinity_norm(context)) {
    return Phase::Exploitation;
  }
  if (in_convex_hull(x, context)) return Phase::Exploitation;
  return Phase::Exploration;
}

}  // namespace optforge
