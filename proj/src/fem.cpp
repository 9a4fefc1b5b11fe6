#include "qgdd/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <Eigen/SparseCholesky>

namespace qgdd {

namespace {

// Gauss-Legendre rules on [0, 1].
constexpr std::array<double, 2> kGauss2Points{0.21132486540518711775, 0.78867513459481288225};
constexpr std::array<double, 2> kGauss2Weights{0.5, 0.5};

constexpr std::array<double, 5> kGauss5Points{0.04691007703066800360, 0.23076534494715845448, 0.5,
                                              0.76923465505284154552, 0.95308992296933199640};
constexpr std::array<double, 5> kGauss5Weights{0.11846344252809454376, 0.23931433524968323402,
                                               0.28444444444444444444, 0.23931433524968323402,
                                               0.11846344252809454376};

void check_positive(double value, const char* name, EdgeId e, double x) {
  if (!std::isfinite(value) || !(value > 0.0))
    throw CoefficientError(std::string(name) + " must be positive: edge " + std::to_string(e) + ", x = " +
                           std::to_string(x) + ", value = " + std::to_string(value));
}

double central_derivative(const Expr& u, double x) {
  constexpr double d = 1e-3;
  return (8.0 * (u(x + d) - u(x - d)) - (u(x + 2 * d) - u(x - 2 * d))) / (12.0 * d);
}

}  // namespace

Mesh build_mesh(const MetricGraph& g, double target_h) {
  if (!(target_h > 0.0)) throw std::invalid_argument("target_h must be positive");
  std::vector<int> n(static_cast<size_t>(g.num_edges()));
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    n[static_cast<size_t>(e)] = std::max(2, static_cast<int>(std::ceil(g.edge(e).length / target_h - 1e-12)));
  return build_mesh(g, std::move(n));
}

Mesh build_mesh(const MetricGraph& g, std::vector<int> intervals) {
  if (intervals.size() != static_cast<size_t>(g.num_edges()))
    throw std::invalid_argument("one interval count per edge required");
  Mesh mesh;
  mesh.spacing.resize(intervals.size());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const int n = intervals[static_cast<size_t>(e)];
    if (n < 2) throw std::invalid_argument("every edge needs at least 2 intervals");
    const double h = g.edge(e).length / n;
    mesh.spacing[static_cast<size_t>(e)] = h;
    mesh.h_max = std::max(mesh.h_max, h);
  }
  mesh.intervals = std::move(intervals);
  return mesh;
}

DofMap::DofMap(const MetricGraph& g, const Mesh& mesh)
    : intervals_(mesh.intervals), num_vertices_(g.num_vertices()) {
  int offset = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    edge_offset_.push_back(offset);
    offset += mesh.intervals[static_cast<size_t>(e)] - 1;
    origin_.push_back(g.edge(e).origin);
    terminal_.push_back(g.edge(e).terminal);
  }
  vertex_start_ = offset;
}

Problem::Problem(MetricGraph g, Mesh m, std::vector<Expr> c_e, std::vector<Expr> p_e, std::vector<Expr> f_e)
    : graph(std::move(g)), mesh(std::move(m)), c(std::move(c_e)), p(std::move(p_e)), f(std::move(f_e)) {
  const auto m_edges = static_cast<size_t>(graph.num_edges());
  if (c.size() != m_edges || p.size() != m_edges || f.size() != m_edges)
    throw std::invalid_argument("one coefficient expression per edge required");
  if (mesh.intervals.size() != m_edges) throw std::invalid_argument("mesh does not match graph");
  dofs = DofMap(graph, mesh);
}

Problem::Problem(MetricGraph g, Mesh m, const Expr& c_all, const Expr& p_all, const Expr& f_all)
    : Problem(g, std::move(m), std::vector<Expr>(static_cast<size_t>(g.num_edges()), c_all),
              std::vector<Expr>(static_cast<size_t>(g.num_edges()), p_all),
              std::vector<Expr>(static_cast<size_t>(g.num_edges()), f_all)) {}

EdgeMatrix edge_matrix(const Problem& problem, EdgeId e) {
  const int n = problem.mesh.intervals[static_cast<size_t>(e)];
  const double h = problem.mesh.spacing[static_cast<size_t>(e)];
  const Expr& c = problem.c[static_cast<size_t>(e)];
  const Expr& p = problem.p[static_cast<size_t>(e)];
  const Expr& f = problem.f[static_cast<size_t>(e)];

  EdgeMatrix m;
  m.diag.assign(static_cast<size_t>(n) + 1, 0.0);
  m.off.assign(static_cast<size_t>(n), 0.0);
  m.load.assign(static_cast<size_t>(n) + 1, 0.0);
  for (int k = 0; k < n; ++k) {
    double kll = 0.0, mll = 0.0, mlr = 0.0, mrr = 0.0, fl = 0.0, fr = 0.0;
    for (size_t q = 0; q < kGauss2Points.size(); ++q) {
      const double t = kGauss2Points[q];
      const double w = kGauss2Weights[q] * h;
      const double x = (k + t) * h;
      const double cx = c(x), px = p(x), fx = f(x);
      check_positive(cx, "c", e, x);
      check_positive(px, "p", e, x);
      const double left = 1.0 - t, right = t;
      kll += w * cx / (h * h);
      mll += w * px * left * left;
      mlr += w * px * left * right;
      mrr += w * px * right * right;
      fl += w * fx * left;
      fr += w * fx * right;
    }
    const auto kk = static_cast<size_t>(k);
    m.diag[kk] += kll + mll;
    m.diag[kk + 1] += kll + mrr;
    m.off[kk] += -kll + mlr;
    m.load[kk] += fl;
    m.load[kk + 1] += fr;
  }
  return m;
}

SparseSystem assemble(const Problem& problem) {
  const DofMap& dofs = problem.dofs;
  std::vector<Eigen::Triplet<double>> triplets;
  SparseSystem sys;
  sys.rhs = Vector::Zero(dofs.size());
  sys.vertex_block_start = dofs.vertex_block_start();
  for (EdgeId e = 0; e < problem.graph.num_edges(); ++e) {
    const EdgeMatrix em = edge_matrix(problem, e);
    const int n = dofs.intervals(e);
    for (int j = 0; j <= n; ++j) {
      const int row = dofs.node(e, j);
      triplets.emplace_back(row, row, em.diag[static_cast<size_t>(j)]);
      sys.rhs[row] += em.load[static_cast<size_t>(j)];
      if (j < n) {
        const int col = dofs.node(e, j + 1);
        triplets.emplace_back(row, col, em.off[static_cast<size_t>(j)]);
        triplets.emplace_back(col, row, em.off[static_cast<size_t>(j)]);
      }
    }
  }
  sys.A.resize(dofs.size(), dofs.size());
  sys.A.setFromTriplets(triplets.begin(), triplets.end());
  return sys;
}

Vector solve_direct(const SparseSystem& system) { return solve_direct(system.A, system.rhs); }

Vector solve_direct(const SparseMatrix& A, const Vector& b) {
  const Eigen::SparseMatrix<double> colmajor = A;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(colmajor);
  if (llt.info() != Eigen::Success) throw NotSpdError("Cholesky factorization failed: matrix is not SPD");
  Vector x = llt.solve(b);
  // One step of refinement keeps the residual at rounding level for ill-scaled meshes.
  const Vector r = b - colmajor * x;
  x += llt.solve(r);
  return x;
}

Vector interpolate(const Problem& problem, const std::vector<Expr>& u) {
  const MetricGraph& g = problem.graph;
  const DofMap& dofs = problem.dofs;
  Vector v(dofs.size());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const double h = problem.mesh.spacing[static_cast<size_t>(e)];
    for (int j = 1; j < dofs.intervals(e); ++j) v[dofs.interior(e, j)] = u[static_cast<size_t>(e)](j * h);
  }
  for (VertexId w = 0; w < g.num_vertices(); ++w) {
    const EdgeId e = g.incident(w).front();
    const double x = g.edge(e).origin == w ? 0.0 : g.edge(e).length;
    v[dofs.vertex(w)] = u[static_cast<size_t>(e)](x);
  }
  return v;
}

ErrorNorms error_norms(const Problem& problem, const Vector& u_h, const std::vector<Expr>& exact,
                       const std::optional<std::vector<Expr>>& exact_dx) {
  const DofMap& dofs = problem.dofs;
  double l2 = 0.0, semi = 0.0;
  for (EdgeId e = 0; e < problem.graph.num_edges(); ++e) {
    const auto ei = static_cast<size_t>(e);
    const double h = problem.mesh.spacing[ei];
    for (int k = 0; k < dofs.intervals(e); ++k) {
      const double a = u_h[dofs.node(e, k)];
      const double b = u_h[dofs.node(e, k + 1)];
      const double slope = (b - a) / h;
      for (size_t q = 0; q < kGauss5Points.size(); ++q) {
        const double t = kGauss5Points[q];
        const double x = (k + t) * h;
        const double w = kGauss5Weights[q] * h;
        const double uh = a + t * (b - a);
        const double du = exact_dx ? (*exact_dx)[ei](x) : central_derivative(exact[ei], x);
        const double ev = uh - exact[ei](x);
        const double ed = slope - du;
        l2 += w * ev * ev;
        semi += w * ed * ed;
      }
    }
  }
  return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

namespace {

void write_real(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

}  // namespace

void write_matrix_market(std::ostream& out, const SparseMatrix& A) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  for (int r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ';
      write_real(out, it.value());
      out << '\n';
    }
}

void write_matrix_market(std::ostream& out, const Eigen::MatrixXd& A) {
  out << "%%MatrixMarket matrix array real general\n";
  out << A.rows() << ' ' << A.cols() << '\n';
  for (Eigen::Index c = 0; c < A.cols(); ++c)
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
      write_real(out, A(r, c));
      out << '\n';
    }
}

void write_matrix_market(std::ostream& out, const Vector& v) {
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    write_real(out, v[i]);
    out << '\n';
  }
}

}  // namespace qgdd
