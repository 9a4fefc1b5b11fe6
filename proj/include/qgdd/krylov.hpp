#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "qgdd/linear_operator.hpp"

namespace qgdd {

/// Stop once ||b - A x|| / ||b|| <= tolerance. Default tolerance is sqrt(machine epsilon).
struct StoppingRule {
  double tolerance = std::sqrt(std::numeric_limits<double>::epsilon());
  int max_iterations = 10000;
};

enum class SolveStatus { Converged, MaxIterations, Breakdown, Indefinite, Diverged };

std::string to_string(SolveStatus status);

struct SolveReport {
  std::string solver;
  int iterations = 0;
  /// Relative residual before the first iteration and after each iteration.
  std::vector<double> residual_history;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  std::string message;
  double wall_time = 0.0;
  int matvecs = 0;
  int precond_applies = 0;
  int restarts = 0;

  double final_residual() const { return residual_history.empty() ? 0.0 : residual_history.back(); }
};

struct SolveResult {
  Eigen::VectorXd x;
  SolveReport report;
};

/// Right-preconditioned BiCGSTAB: solves A M^{-1} y = b, x = M^{-1} y, so the monitored
/// residual is the true residual of A x = b. One iteration is the full two-matvec step;
/// a solve that converges at the half step still counts that iteration.
///
/// On breakdown (rho or omega vanishing) the method restarts once from the current
/// iterate; a second breakdown ends the solve with status Breakdown. Convergence of the
/// recursive residual is confirmed against the recomputed true residual.
SolveResult bicgstab(const LinearOperator& A, const LinearOperator& prec, const Eigen::VectorXd& b,
                     const StoppingRule& rule = {}, const Eigen::VectorXd& x0 = {});

/// Preconditioned conjugate gradients for SPD A and M. Stops with status Indefinite if
/// p^T A p <= 0 is encountered.
SolveResult pcg(const LinearOperator& A, const LinearOperator& prec, const Eigen::VectorXd& b,
                const StoppingRule& rule = {}, const Eigen::VectorXd& x0 = {});

/// x_{n+1} = x_n + theta M^{-1} (b - A x_n). Throws std::invalid_argument if theta <= 0.
/// Stops with status Diverged when the residual exceeds 10x its initial value.
SolveResult richardson(const LinearOperator& A, const LinearOperator& prec, const Eigen::VectorXd& b, double theta,
                       const StoppingRule& rule = {}, const Eigen::VectorXd& x0 = {});

struct ConditionEstimate {
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  double kappa = 0.0;
  int power_iterations = 0;
  int inverse_iterations = 0;
};

struct EigenOptions {
  /// Relative change of successive Rayleigh quotients at which an estimate is accepted.
  double tolerance = 1e-6;
  int max_iterations = 5000;
  unsigned long long seed = 12345;
};

/// Extreme eigenvalues of an operator with real positive spectrum: power iteration for
/// lambda_max, inverse iteration through `solve` (x -> A^{-1} x) for lambda_min.
/// Throws std::runtime_error if either iteration does not converge.
ConditionEstimate cond_estimate(const LinearOperator& A,
                                const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& solve,
                                const EigenOptions& options = {});

/// SPD shortcut: inverse iteration uses CG to relative residual 1e-12.
ConditionEstimate cond_estimate(const LinearOperator& A, const EigenOptions& options = {});

}  // namespace qgdd
