#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "optforge/dataio.hpp"
#include "optforge/evaluator.hpp"
#include "optforge/validation.hpp"

namespace optforge {

/// Stiff reaction system with rates k1 = 0.04, k2 = 1e4, k3 = 3e7.
/// dx/dt = -k1 x + k2 y z
/// dy/dt =  k1 x - k2 y z - k3 y^2
/// dz/dt =  k3 y^2
void robertson_rhs(const double y[3], double dydt[3]);

/// Implicit Euler step with a full Newton solve of the 3x3 system; iterates
/// to machine precision so x + y + z is conserved to roundoff.
void robertson_backward_euler_step(double y[3], double h);

/// Integrates `cells` independent initial conditions for n_steps of size h.
/// State is stored column-major: component c of cell i lives at
/// state[c * cells + i].
void robertson_integrate(std::vector<double>& state, std::size_t cells, double h,
                         std::int64_t n_steps);

/// Reference triple-loop product of column-major square matrices:
/// C[i + j*n] = sum_k A[i + k*n] * B[k + j*n].
std::vector<double> matmul_reference(const std::vector<double>& a,
                                     const std::vector<double>& b, std::size_t n);

struct ProblemPack {
  std::string name;            // "kinetics" or "matmul"
  std::string brief;           // task statement handed to the agents
  std::vector<CorrectnessCase> correctness;
  std::vector<EvalCondition> conditions;
  double tolerance = 1e-6;
  std::vector<std::string> sketches;  // seed artifacts offered to the strategist
};

struct PackOptions {
  std::uint64_t seed = 0;
  bool full_scale = false;  // desk grids by default; full-size grids with the flag
};

/// Kinetics pack. Candidate input row 0 is the header
/// {cells, h, n_steps}; rows 1..3 are the x, y, z vectors (cells wide).
/// Expected output mirrors rows 1..3 after integration. Desk grid uses
/// cells in {10, 100, 1000, 10000} with n_steps scaled down; full scale uses
/// 100 conditions of 1e4 steps. Tolerance 1e-4.
ProblemPack make_kinetics_pack(const PackOptions& options);

/// Matmul pack. Candidate input row 0 is {n}; rows 1..n hold A and rows
/// n+1..2n hold B, one matrix column per row (column-major serialization).
/// Expected output is C in the same layout. Desk timing grid N in
/// {32, 64, ..., 512}; correctness sizes {10, 64, 512} on desk and
/// {10, 1000, 4096} at full scale. Tolerance 1e-6.
ProblemPack make_matmul_pack(const PackOptions& options);

ProblemPack make_pack(const std::string& name, const PackOptions& options);
std::vector<std::string> pack_names();

}  // namespace optforge
