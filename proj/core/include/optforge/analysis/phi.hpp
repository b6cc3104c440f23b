#pragma once

#include <string>
#include <vector>

namespace optforge {

enum class Phase { Exploration, Exploitation };

std::string to_string(Phase phase);

/// L(C): the largest infinity norm over the context points,
/// max_i max_j |c_ij|. Zero for an empty context.
double max_infinity_norm(const std::vector<std::vector<double>>& context);

/// Smallest Euclidean distance from x to any context point.
double min_distance(const std::vector<double>& x,
                    const std::vector<std::vector<double>>& context);

/// True when x is a convex combination of the context points, decided by a
/// phase-1 simplex feasibility solve (Bland's rule, tolerance 1e-9).
bool in_convex_hull(const std::vector<double>& x,
                    const std::vector<std::vector<double>>& context);

/// Phi: exploitation iff min_distance(x, C) <= 0.1 * L(C) or x lies in the
/// hull of C; exploration otherwise. An empty context is exploration.
Phase classify_phase(const std::vector<double>& x,
                     const std::vector<std::vector<double>>& context);

}  // namespace optforge
