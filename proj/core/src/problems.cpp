#include "optforge/problems.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace optforge {

namespace {

constexpr double kRate1 = 0.04;
constexpr double kRate2 = 1.0e4;
constexpr double kRate3 = 3.0e7;

}  // namespace

void robertson_rhs(const double y[3], double dydt[3]) {
  double fast = kRate2 * y[1] * y[2];
  double quad = kRate3 * y[1] * y[1];
  dydt[0] = -kRate1 * y[0] + fast;
  dydt[1] = kRate1 * y[0] - fast - quad;
  dydt[2] = quad;
}

namespace {

// 3x3 solve with partial pivoting, in place. a is row-major, b the RHS.
void solve3(double a[3][3], double b[3]) {
  int perm[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int row = col + 1; row < 3; ++row) {
      if (std::abs(a[perm[row]][col]) > std::abs(a[perm[pivot]][col])) pivot = row;
    }
    std::swap(perm[col], perm[pivot]);
    double diag = a[perm[col]][col];
    if (diag == 0.0) throw std::runtime_error("singular Newton system");
    for (int row = col + 1; row < 3; ++row) {
      double factor = a[perm[row]][col] / diag;
      a[perm[row]][col] = 0.0;
      for (int k = col + 1; k < 3; ++k) a[perm[row]][k] -= factor * a[perm[col]][k];
      b[perm[row]] -= factor * b[perm[col]];
    }
  }
  for (int col = 2; col >= 0; --col) {
    double v = b[perm[col]];
    for (int k = col + 1; k < 3; ++k) v -= a[perm[col]][k] * b[perm[k]];
    b[perm[col]] = v / a[perm[col]][col];
  }
  double x0 = b[perm[0]], x1 = b[perm[1]], x2 = b[perm[2]];
  b[0] = x0;
  b[1] = x1;
  b[2] = x2;
}

}  // namespace

void robertson_backward_euler_step(double y[3], double h) {
  double prev[3] = {y[0], y[1], y[2]};
  // Newton on G(y) = y - prev - h f(y); iterate to machine precision so the
  // linear invariant x + y + z survives long integrations.
  for (int iter = 0; iter < 50; ++iter) {
    double f[3];
    robertson_rhs(y, f);
    double residual[3] = {y[0] - prev[0] - h * f[0], y[1] - prev[1] - h * f[1],
                          y[2] - prev[2] - h * f[2]};
    double jac[3][3] = {
        {1.0 + h * kRate1, -h * kRate2 * y[2], -h * kRate2 * y[1]},
        {-h * kRate1, 1.0 + h * (kRate2 * y[2] + 2.0 * kRate3 * y[1]), h * kRate2 * y[1]},
        {0.0, -h * 2.0 * kRate3 * y[1], 1.0}};
    double step[3] = {-residual[0], -residual[1], -residual[2]};
    solve3(jac, step);
    y[0] += step[0];
    y[1] += step[1];
    y[2] += step[2];
    double scale = std::max({1.0, std::abs(y[0]), std::abs(y[1]), std::abs(y[2])});
    double delta = std::max({std::abs(step[0]), std::abs(step[1]), std::abs(step[2])});
    if (delta <= 1e-16 * scale) return;
  }
}

void robertson_integrate(std::vector<double>& state, std::size_t cells, double h,
                         std::int64_t n_steps) {
  if (state.size() != 3 * cells) throw std::invalid_argument("state size must be 3*cells");
  for (std::size_t cell = 0; cell < cells; ++cell) {
    double y[3] = {state[cell], state[cells + cell], state[2 * cells + cell]};
    for (std::int64_t step = 0; step < n_steps; ++step) {
      robertson_backward_euler_step(y, h);
    }
    state[cell] = y[0];
    state[cells + cell] = y[1];
    state[2 * cells + cell] = y[2];
  }
}

std::vector<double> matmul_reference(const std::vector<double>& a,
                                     const std::vector<double>& b, std::size_t n) {
  if (a.size() != n * n || b.size() != n * n) {
    throw std::invalid_argument("matmul_reference expects two n*n matrices");
  }
  std::vector<double> c(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      double bkj = b[k + j * n];
      for (std::size_t i = 0; i < n; ++i) {
        c[i + j * n] += a[i + k * n] * bkj;
      }
    }
  }
  return c;
}

namespace {

constexpr const char* kKineticsBrief =
    "Optimize a batch solver for a stiff three-species reaction system.\n"
    "Species x, y, z evolve as:\n"
    "  dx/dt = -0.04*x + 1e4*y*z\n"
    "  dy/dt =  0.04*x - 1e4*y*z - 3e7*y*y\n"
    "  dz/dt =  3e7*y*y\n"
    "Input file: row 0 is `cells, h, n_steps`; rows 1..3 hold the x, y, z vectors "
    "(one value per cell). Advance every cell n_steps implicit-Euler steps of size h "
    "(solve the nonlinear step equation to convergence, e.g. by Newton iteration) and "
    "write rows x, y, z of the final state to the output file. The goal is the fastest "
    "solver whose results stay within the correctness tolerance.";

constexpr const char* kKineticsSketchFlat =
    "// sketch A: state packed flat, column-major over cells\n"
    "// state[c*cells + i] is component c of cell i\n"
    "for (step = 0; step < n_steps; ++step) {\n"
    "  for (i = 0; i < cells; ++i) {\n"
    "    x = state[0*cells + i]; y = state[1*cells + i]; z = state[2*cells + i];\n"
    "    solve_implicit_step(&x, &y, &z, h);\n"
    "    state[0*cells + i] = x; state[1*cells + i] = y; state[2*cells + i] = z;\n"
    "  }\n"
    "}\n";

constexpr const char* kKineticsSketchSubscript =
    "// sketch B: state held as a 2-D array indexed [component][cell]\n"
    "for (step = 0; step < n_steps; ++step) {\n"
    "  for (i = 0; i < cells; ++i) {\n"
    "    x = state[0][i]; y = state[1][i]; z = state[2][i];\n"
    "    solve_implicit_step(&x, &y, &z, h);\n"
    "    state[0][i] = x; state[1][i] = y; state[2][i] = z;\n"
    "  }\n"
    "}\n";

constexpr const char* kMatmulBrief =
    "Optimize dense square matrix multiplication C = A * B in double precision.\n"
    "Matrices are column-major: element (i, j) of an n-by-n matrix lives at index "
    "i + j*n. Input file: row 0 is `n`; rows 1..n hold the columns of A (row j is "
    "column j-1, n values); rows n+1..2n hold the columns of B. Write the n columns of "
    "C to the output file in the same layout. The goal is the fastest multiply whose "
    "result stays within the correctness tolerance.";

constexpr const char* kMatmulSketchFlat =
    "// sketch A: flat column-major indexing\n"
    "for (j = 0; j < n; ++j)\n"
    "  for (k = 0; k < n; ++k)\n"
    "    for (i = 0; i < n; ++i)\n"
    "      c[i + j*n] += a[i + k*n] * b[k + j*n];\n";

constexpr const char* kMatmulSketchSubscript =
    "// sketch B: 2-D subscripting over [column][row]\n"
    "for (j = 0; j < n; ++j)\n"
    "  for (k = 0; k < n; ++k)\n"
    "    for (i = 0; i < n; ++i)\n"
    "      c[j][i] += a[k][i] * b[j][k];\n";

Table kinetics_input(std::size_t cells, double h, std::int64_t n_steps, SplitMix64& rng) {
  Table input(4);
  input[0] = {static_cast<double>(cells), h, static_cast<double>(n_steps)};
  input[1].reserve(cells);
  input[2].reserve(cells);
  input[3].reserve(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    input[1].push_back(rng.uniform(0.2, 1.0));
    input[2].push_back(rng.uniform(0.0, 1e-4));
    input[3].push_back(rng.uniform(0.0, 0.3));
  }
  return input;
}

Table kinetics_expected(const Table& input) {
  std::size_t cells = static_cast<std::size_t>(input[0][0]);
  double h = input[0][1];
  auto n_steps = static_cast<std::int64_t>(input[0][2]);
  std::vector<double> state;
  state.reserve(3 * cells);
  for (int c = 1; c <= 3; ++c) state.insert(state.end(), input[c].begin(), input[c].end());
  robertson_integrate(state, cells, h, n_steps);
  Table expected(3);
  for (int c = 0; c < 3; ++c) {
    expected[c].assign(state.begin() + c * cells, state.begin() + (c + 1) * cells);
  }
  return expected;
}

Table matmul_input(std::size_t n, SplitMix64& rng) {
  Table input;
  input.push_back({static_cast<double>(n)});
  for (std::size_t m = 0; m < 2; ++m) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<double> column;
      column.reserve(n);
      for (std::size_t i = 0; i < n; ++i) column.push_back(rng.next_double());
      input.push_back(std::move(column));
    }
  }
  return input;
}

Table matmul_expected(const Table& input) {
  std::size_t n = static_cast<std::size_t>(input[0][0]);
  std::vector<double> a, b;
  a.reserve(n * n);
  b.reserve(n * n);
  for (std::size_t j = 0; j < n; ++j) a.insert(a.end(), input[1 + j].begin(), input[1 + j].end());
  for (std::size_t j = 0; j < n; ++j) {
    b.insert(b.end(), input[1 + n + j].begin(), input[1 + n + j].end());
  }
  auto c = matmul_reference(a, b, n);
  Table expected;
  for (std::size_t j = 0; j < n; ++j) {
    expected.emplace_back(c.begin() + j * n, c.begin() + (j + 1) * n);
  }
  return expected;
}

}  // namespace

ProblemPack make_kinetics_pack(const PackOptions& options) {
  ProblemPack pack;
  pack.name = "kinetics";
  pack.brief = kKineticsBrief;
  pack.tolerance = 1e-4;
  pack.sketches = {kKineticsSketchFlat, kKineticsSketchSubscript};

  SplitMix64 rng(options.seed ^ 0x6b696e6574696373ull);
  const double h = 1e-4;
  const std::int64_t truth_steps = 10000;

  CorrectnessCase ic_case;
  ic_case.name = "ic100";
  ic_case.tolerance = pack.tolerance;
  ic_case.input = kinetics_input(100, h, truth_steps, rng);
  ic_case.expected = kinetics_expected(ic_case.input);
  pack.correctness.push_back(std::move(ic_case));

  std::vector<std::size_t> grid = {10, 100, 1000, 10000};
  if (options.full_scale) grid = {10, 100, 1000, 10000, 100000, 1000000};
  const std::int64_t timing_steps = options.full_scale ? 10000 : 100;
  for (std::size_t cells : grid) {
    EvalCondition condition;
    condition.name = "cells=" + std::to_string(cells);
    condition.input = kinetics_input(cells, h, timing_steps, rng);
    pack.conditions.push_back(std::move(condition));
  }
  return pack;
}

ProblemPack make_matmul_pack(const PackOptions& options) {
  ProblemPack pack;
  pack.name = "matmul";
  pack.brief = kMatmulBrief;
  pack.tolerance = 1e-6;
  pack.sketches = {kMatmulSketchFlat, kMatmulSketchSubscript};

  SplitMix64 rng(options.seed ^ 0x6d61746d756c0101ull);
  std::vector<std::size_t> correctness_sizes = {10, 64, 512};
  if (options.full_scale) correctness_sizes = {10, 1000, 4096};
  for (std::size_t n : correctness_sizes) {
    CorrectnessCase c;
    c.name = "n" + std::to_string(n);
    c.tolerance = pack.tolerance;
    c.input = matmul_input(n, rng);
    c.expected = matmul_expected(c.input);
    pack.correctness.push_back(std::move(c));
  }

  std::size_t max_n = options.full_scale ? 4096 : 512;
  for (std::size_t n = 32; n <= max_n; n *= 2) {
    EvalCondition condition;
    condition.name = "N=" + std::to_string(n);
    condition.input = matmul_input(n, rng);
    pack.conditions.push_back(std::move(condition));
  }
  return pack;
}

ProblemPack make_pack(const std::string& name, const PackOptions& options) {
  if (name == "kinetics") return make_kinetics_pack(options);
  if (name == "matmul") return make_matmul_pack(options);
  throw std::invalid_argument("unknown problem pack: " + name +
                              " (expected kinetics or matmul)");
}

std::vector<std::string> pack_names() { return {"kinetics", "matmul"}; }

}  // namespace optforge
