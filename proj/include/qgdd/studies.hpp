#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qgdd/fem.hpp"
#include "qgdd/graph.hpp"
#include "qgdd/io.hpp"
#include "qgdd/krylov.hpp"
#include "qgdd/preconditioners.hpp"

namespace qgdd {

enum class SolverKind { BiCGSTAB, PCG, Richardson };

SolverKind parse_solver_kind(std::string_view name);  // bicgstab | pcg | richardson
std::string to_string(SolverKind kind);

// End-to-end solves default to a tighter residual than the Krylov kernels so
// the reconstructed u tracks the direct solve to ~1e-9 even when cond(S) is large.
inline constexpr double kSchurSolveTolerance = 1e-11;

struct SchurSolveOptions {
  PrecKind prec = PrecKind::NeumannNeumann;
  SolverKind solver = SolverKind::BiCGSTAB;
  StoppingRule rule{kSchurSolveTolerance};
  double theta = 0.5;
  bool nn_scaled = true;
};

struct SchurSolveOutcome {
  Vector u;        // full dof vector
  Vector u_gamma;  // interface values
  SolveReport report;
  double operator_setup_seconds = 0.0;
  double prec_setup_seconds = 0.0;
  int interface_size = 0;
};

/// Substructured solve: build S and g on the partition, solve S u_Γ = g from a zero
/// initial guess, then recover the interior by harmonic extension with the true load.
SchurSolveOutcome solve_schur(const Problem& problem, const Partition& partition, const SchurSolveOptions& options);

/// "dgm" (param = level) or "ba" (param = vertex count, attachment `ba_m`, seed).
MetricGraph family_graph(const std::string& family, int param, int ba_m, std::uint64_t seed);

// --- benchmark sweep ----------------------------------------------------------

struct BenchSpec {
  std::string family = "dgm";
  std::vector<int> params;
  std::vector<int> log2_levels;
  std::vector<PrecKind> precs;
  SolverKind solver = SolverKind::BiCGSTAB;
  std::string c = "1", p = "1", f = "1";
  std::uint64_t seed = 1;
  int ba_m = 2;
  /// Replace the assembled load by a seeded random nodal vector, uniform in [-1, 1].
  bool random_load = false;
  bool with_cond = false;
  StoppingRule rule;
  double theta = 0.5;
};

/// Uniform [-1, 1] entries from std::mt19937_64(seed).
Vector random_load_vector(Eigen::Index n, std::uint64_t seed);

/// Throws ConfigError on empty ranges or unparsable coefficients.
void validate_bench_spec(const BenchSpec& spec);

struct BenchRow {
  std::string family;
  int param = 0;
  int n_vertices = 0;
  int n_edges = 0;
  int log2_inv_h = 0;
  PrecKind prec = PrecKind::None;
  SolverKind solver = SolverKind::BiCGSTAB;
  int iters = 0;
  bool converged = false;
  double seconds = 0.0;  // preconditioner setup + iteration
  int matvecs = 0;
  double prec_setup_seconds = 0.0;
  double solve_seconds = 0.0;
  std::optional<double> kappa;  // of the preconditioned interface operator
};

/// Rows ordered by (param, level, preconditioner list order).
std::vector<BenchRow> run_bench(const BenchSpec& spec);

/// Columns: family,param,n_vertices,n_edges,log2_inv_h,prec,solver,iters,converged,seconds,matvecs
/// plus a trailing kappa column when the spec asks for condition estimates. A leading
/// '#' line records coefficients and seed.
void write_bench_csv(std::ostream& out, const BenchSpec& spec, const std::vector<BenchRow>& rows);
/// Iteration matrix: one line per (param, level), one column per preconditioner.
void print_bench_table(std::ostream& out, const BenchSpec& spec, const std::vector<BenchRow>& rows);

// --- FEM convergence ----------------------------------------------------------

struct ConvergenceRow {
  int log2_inv_h = 0;
  double h = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  /// Least-squares slopes of log(error) against log(h); empty when errors are at rounding level.
  std::optional<double> l2_order;
  std::optional<double> h1_order;
};

/// Requires `config.exact`. Each level is solved directly.
ConvergenceStudy run_convergence(const ProblemConfig& config, const std::vector<int>& levels);

double fitted_order(const std::vector<double>& h, const std::vector<double>& err);

void write_convergence_csv(std::ostream& out, const ConvergenceStudy& study);

// --- conditioning -------------------------------------------------------------

struct CondRow {
  int log2_inv_h = 0;
  int interface_size = 0;
  ConditionEstimate estimate;
};

/// Extreme eigenvalues of S (prec = None) or of M^{-1} S, per mesh level.
std::vector<CondRow> run_cond(const ProblemConfig& config, const std::vector<int>& levels, PrecKind prec,
                              const EigenOptions& options = {});

void write_cond_csv(std::ostream& out, PrecKind prec, const std::vector<CondRow>& rows);

}  // namespace qgdd
