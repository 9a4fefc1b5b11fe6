#pragma once

#include <string>
#include <string_view>

#include "qgdd/linear_operator.hpp"
#include "qgdd/substructuring.hpp"

namespace qgdd {

enum class PrecKind { None, Diagonal, Polynomial, NeumannNeumann };

PrecKind parse_prec_kind(std::string_view name);  // none | diag | poly | nn
std::string to_string(PrecKind kind);

struct PrecOptions {
  /// Multiplicity scaling D_Γ = diag(1 / multiplicity) around the Neumann-Neumann sum.
  bool scaled = true;
};

/// Interface preconditioner M^{-1} for the Schur system.
///
///   none        z = r
///   diag        z = D^{-1} r                       D = diag(S)
///   poly        z = D^{-1} r + D^{-1} (D - S) D^{-1} r
///   nn          z = D_Γ (sum_i R_i^T S^(i)^{-1} R_i) D_Γ r
///
/// The diagonal of S is assembled from the local dense Schur complements (|V_i ∩ Γ|
/// Dirichlet solves per subgraph). Neumann-Neumann reuses the Neumann factors already
/// held by the operator, so its setup is only the scaling vector.
class Preconditioner final : public LinearOperator {
 public:
  Preconditioner(PrecKind kind, const SchurOperator& op, PrecOptions options = {});

  Eigen::Index size() const override { return op_.size(); }
  void apply(const Vector& r, Vector& z) const override;

  PrecKind kind() const noexcept { return kind_; }
  const Vector& schur_diagonal() const noexcept { return diag_; }
  const Vector& interface_scaling() const noexcept { return scaling_; }
  double setup_seconds() const noexcept { return setup_seconds_; }

 private:
  PrecKind kind_;
  const SchurOperator& op_;
  PrecOptions options_;
  Vector diag_;
  Vector scaling_;
  double setup_seconds_ = 0.0;
};

/// diag(S) from local supports. Throws std::runtime_error on a nonpositive entry.
Vector schur_diagonal(const SchurOperator& op);

/// One damped preconditioned Richardson update u + theta M^{-1} (g - S u).
Vector nn_richardson_step(const LinearOperator& op, const LinearOperator& prec, const Vector& g, const Vector& u,
                          double theta);

}  // namespace qgdd
