#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qgdd/expr.hpp"
#include "qgdd/graph.hpp"

namespace qgdd {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Equidistant subdivision of every edge into `intervals[e] >= 2` cells of width `spacing[e]`.
struct Mesh {
  std::vector<int> intervals;
  std::vector<double> spacing;
  double h_max = 0.0;
};

/// n_e = max(2, ceil(length_e / target_h)).
Mesh build_mesh(const MetricGraph& g, double target_h);
Mesh build_mesh(const MetricGraph& g, std::vector<int> intervals);

/// Global numbering: interior nodes of edge 0, edge 1, ..., then one dof per vertex.
class DofMap {
 public:
  DofMap() = default;
  DofMap(const MetricGraph& g, const Mesh& mesh);

  int size() const noexcept { return vertex_start_ + num_vertices_; }
  int vertex_block_start() const noexcept { return vertex_start_; }
  int vertex(VertexId v) const noexcept { return vertex_start_ + v; }
  /// Interior node j = 1..n_e-1 of edge e.
  int interior(EdgeId e, int j) const noexcept { return edge_offset_[static_cast<size_t>(e)] + j - 1; }
  /// Node j = 0..n_e of edge e; the end nodes map to the vertex dofs.
  int node(EdgeId e, int j) const noexcept {
    if (j == 0) return vertex(origin_[static_cast<size_t>(e)]);
    if (j == intervals_[static_cast<size_t>(e)]) return vertex(terminal_[static_cast<size_t>(e)]);
    return interior(e, j);
  }
  int intervals(EdgeId e) const noexcept { return intervals_[static_cast<size_t>(e)]; }

 private:
  std::vector<int> edge_offset_;
  std::vector<int> intervals_;
  std::vector<VertexId> origin_;
  std::vector<VertexId> terminal_;
  int vertex_start_ = 0;
  int num_vertices_ = 0;
};

class CoefficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotSpdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// -(c u')' + p u = f on every edge, continuity and Kirchhoff conditions at vertices.
/// Coefficients are per edge, in the edge's local coordinate x in [0, length].
struct Problem {
  MetricGraph graph;
  Mesh mesh;
  DofMap dofs;
  std::vector<Expr> c;
  std::vector<Expr> p;
  std::vector<Expr> f;

  Problem() = default;
  Problem(MetricGraph g, Mesh m, std::vector<Expr> c_e, std::vector<Expr> p_e, std::vector<Expr> f_e);
  /// Same coefficient on every edge.
  Problem(MetricGraph g, Mesh m, const Expr& c_all, const Expr& p_all, const Expr& f_all);
};

/// Element data of one edge: tridiagonal matrix over the n_e + 1 nodes of the edge
/// (node 0 = origin vertex, node n_e = terminal vertex) and the load against each hat.
struct EdgeMatrix {
  std::vector<double> diag;  // n_e + 1
  std::vector<double> off;   // n_e, coupling node k with node k + 1
  std::vector<double> load;  // n_e + 1
};

/// Integrates c psi' phi' + p psi phi and f phi with 2-point Gauss-Legendre per cell.
/// Throws CoefficientError if c <= 0 or p <= 0 (or non-finite) at a quadrature point.
EdgeMatrix edge_matrix(const Problem& problem, EdgeId e);

struct SparseSystem {
  SparseMatrix A;
  Vector rhs;
  int vertex_block_start = 0;
};

SparseSystem assemble(const Problem& problem);

/// Sparse Cholesky. Throws NotSpdError if the factorization breaks down.
Vector solve_direct(const SparseSystem& system);
Vector solve_direct(const SparseMatrix& A, const Vector& b);

/// Nodal interpolant of per-edge functions. Vertex values come from the first incident edge.
Vector interpolate(const Problem& problem, const std::vector<Expr>& u);

struct ErrorNorms {
  double l2 = 0.0;
  double h1 = 0.0;  // full norm: sqrt(||e||^2 + ||e'||^2)
};

/// Errors of the finite element function `u_h` against `exact` (per edge).
/// `exact_dx` supplies the derivative; without it the derivative is taken by a
/// fourth-order central difference of `exact`.
ErrorNorms error_norms(const Problem& problem, const Vector& u_h, const std::vector<Expr>& exact,
                       const std::optional<std::vector<Expr>>& exact_dx = std::nullopt);

void write_matrix_market(std::ostream& out, const SparseMatrix& A);
void write_matrix_market(std::ostream& out, const Eigen::MatrixXd& A);
void write_matrix_market(std::ostream& out, const Vector& v);

}  // namespace qgdd
