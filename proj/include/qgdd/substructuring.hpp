#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "qgdd/fem.hpp"
#include "qgdd/graph.hpp"
#include "qgdd/linear_operator.hpp"

namespace qgdd {

using LocalFactor = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

/// Neumann problem of one subgraph, local dofs ordered [interior; interface].
///
/// Interior dofs are the edge-interior nodes of the subgraph's edges followed by its
/// vertices that are not on the interface (including degree-1 vertices, which keep
/// their natural condition). Interface dofs are V_i ∩ Γ in ascending vertex order.
struct LocalSystem {
  std::vector<EdgeId> edges;
  std::vector<int> interior_dofs;        // global dof ids
  std::vector<VertexId> interface_vertices;
  std::vector<int> interface_slots;      // positions in the global interface vector

  Eigen::SparseMatrix<double> A;         // full local Neumann matrix
  Eigen::SparseMatrix<double> A_II;
  Eigen::SparseMatrix<double> A_IG;      // |I| x |Γ_i|; A_GI is its transpose
  Eigen::MatrixXd A_GG;
  Vector f_I;
  Vector f_G;

  std::unique_ptr<LocalFactor> dirichlet;  // factor of A_II
  std::unique_ptr<LocalFactor> neumann;    // factor of A

  int num_interior() const noexcept { return static_cast<int>(interior_dofs.size()); }
  int num_interface() const noexcept { return static_cast<int>(interface_vertices.size()); }
};

/// Restricts the assembly to the edges of subgraph `i` and factors both local matrices.
/// Throws NotSpdError if either factorization fails.
LocalSystem build_local(const Problem& problem, const Partition& part, int i);

/// S^(i) = A_GG - A_GI A_II^{-1} A_IG as a dense matrix.
Eigen::MatrixXd local_schur_dense(const LocalSystem& ls);

/// Matrix-free interface Schur complement S = sum_i R_i^T S^(i) R_i.
class SchurOperator final : public LinearOperator {
 public:
  SchurOperator(const Problem& problem, Partition partition);

  Eigen::Index size() const override { return static_cast<Eigen::Index>(partition_.interface.size()); }
  /// y = S x, one Dirichlet solve per subgraph. Throws std::invalid_argument on size mismatch.
  void apply(const Vector& x, Vector& y) const override;

  /// g = sum_i (f_G^(i) - A_GI^(i) A_II^(i)^{-1} f_I^(i)).
  Vector rhs() const;
  /// Local contribution g^(i) restricted to the subgraph's interface dofs.
  Vector local_rhs(int i) const;
  /// Interface right-hand side for an arbitrary global load vector (full dof ordering).
  Vector rhs(const Vector& load) const;

  /// Full dof vector with interface values `u_gamma` and interior values from
  /// A_II u_I = f_I - A_IG u_G (f_I taken as 0 unless `with_load`).
  Vector harmonic_extension(const Vector& u_gamma, bool with_load) const;
  /// Same, with the interior load taken from a global load vector.
  Vector harmonic_extension(const Vector& u_gamma, const Vector& load) const;

  /// Interface part of the local Neumann solve A^(i) w = [0; r_i], i.e. S^(i)^{-1} r_i.
  Vector local_neumann_solve(int i, const Vector& r_local) const;

  Vector restrict_to(int i, const Vector& u_gamma) const;
  void add_from(int i, const Vector& local, Vector& u_gamma) const;

  /// S assembled densely from the local Schur complements. Small interfaces only.
  Eigen::MatrixXd assemble_dense() const;

  int num_subgraphs() const noexcept { return static_cast<int>(locals_.size()); }
  const LocalSystem& local(int i) const { return locals_.at(static_cast<size_t>(i)); }
  const Partition& partition() const noexcept { return partition_; }
  int num_dofs() const noexcept { return num_dofs_; }
  /// Seconds spent building and factoring the local systems.
  double setup_seconds() const noexcept { return setup_seconds_; }

 private:
  Partition partition_;
  std::vector<LocalSystem> locals_;
  int num_dofs_ = 0;
  int vertex_block_start_ = 0;
  double setup_seconds_ = 0.0;
};

}  // namespace qgdd
