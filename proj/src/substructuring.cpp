#include "qgdd/substructuring.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <string>
#include <utility>

namespace qgdd {

namespace {

std::unique_ptr<LocalFactor> factor(const Eigen::SparseMatrix<double>& m, const char* what, int i) {
  auto f = std::make_unique<LocalFactor>(m);
  if (f->info() != Eigen::Success)
    throw NotSpdError(std::string(what) + " matrix of subgraph " + std::to_string(i) + " is not SPD");
  // LDLT succeeds on indefinite input; require a positive pivot diagonal.
  if ((f->vectorD().array() <= 0.0).any())
    throw NotSpdError(std::string(what) + " matrix of subgraph " + std::to_string(i) + " is not SPD");
  return f;
}

}  // namespace

LocalSystem build_local(const Problem& problem, const Partition& part, int i) {
  const MetricGraph& g = problem.graph;
  const DofMap& dofs = problem.dofs;

  LocalSystem ls;
  ls.edges = part.subgraphs.at(static_cast<size_t>(i));
  const auto vertices = subgraph_vertices(g, part, i);

  std::vector<int> edge_start;  // local index of interior node 1 of each local edge
  for (EdgeId e : ls.edges) {
    edge_start.push_back(ls.num_interior());
    for (int j = 1; j < dofs.intervals(e); ++j) ls.interior_dofs.push_back(dofs.interior(e, j));
  }
  std::vector<std::pair<VertexId, int>> vertex_local;  // sorted by vertex id
  for (VertexId v : vertices) {
    if (part.interface_index(v) >= 0) continue;
    vertex_local.emplace_back(v, ls.num_interior());
    ls.interior_dofs.push_back(dofs.vertex(v));
  }
  const int n_interior = ls.num_interior();
  for (VertexId v : vertices) {
    const int slot = part.interface_index(v);
    if (slot < 0) continue;
    vertex_local.emplace_back(v, n_interior + ls.num_interface());
    ls.interface_vertices.push_back(v);
    ls.interface_slots.push_back(slot);
  }
  std::sort(vertex_local.begin(), vertex_local.end());
  auto vertex_index = [&](VertexId v) {
    auto it = std::lower_bound(vertex_local.begin(), vertex_local.end(), std::make_pair(v, -1));
    return it->second;
  };

  const int n_local = n_interior + ls.num_interface();
  std::vector<Eigen::Triplet<double>> triplets;
  Vector load = Vector::Zero(n_local);
  for (size_t k = 0; k < ls.edges.size(); ++k) {
    const EdgeId e = ls.edges[k];
    const int n = dofs.intervals(e);
    auto local_node = [&](int j) {
      if (j == 0) return vertex_index(g.edge(e).origin);
      if (j == n) return vertex_index(g.edge(e).terminal);
      return edge_start[k] + j - 1;
    };
    const EdgeMatrix em = edge_matrix(problem, e);
    for (int j = 0; j <= n; ++j) {
      const int row = local_node(j);
      triplets.emplace_back(row, row, em.diag[static_cast<size_t>(j)]);
      load[row] += em.load[static_cast<size_t>(j)];
      if (j < n) {
        const int col = local_node(j + 1);
        triplets.emplace_back(row, col, em.off[static_cast<size_t>(j)]);
        triplets.emplace_back(col, row, em.off[static_cast<size_t>(j)]);
      }
    }
  }
  ls.A.resize(n_local, n_local);
  ls.A.setFromTriplets(triplets.begin(), triplets.end());
  const int n_iface = ls.num_interface();
  ls.A_II = ls.A.topLeftCorner(n_interior, n_interior);
  ls.A_IG = ls.A.topRightCorner(n_interior, n_iface);
  ls.A_GG = Eigen::MatrixXd(ls.A.bottomRightCorner(n_iface, n_iface));
  ls.f_I = load.head(n_interior);
  ls.f_G = load.tail(n_iface);

  ls.dirichlet = factor(ls.A_II, "Dirichlet", i);
  ls.neumann = factor(ls.A, "Neumann", i);
  return ls;
}

Eigen::MatrixXd local_schur_dense(const LocalSystem& ls) {
  const Eigen::MatrixXd coupling = Eigen::MatrixXd(ls.A_IG);
  const Eigen::MatrixXd solved = ls.dirichlet->solve(coupling);
  Eigen::MatrixXd s = ls.A_GG - coupling.transpose() * solved;
  return 0.5 * (s + s.transpose());
}

SchurOperator::SchurOperator(const Problem& problem, Partition partition)
    : partition_(std::move(partition)),
      num_dofs_(problem.dofs.size()),
      vertex_block_start_(problem.dofs.vertex_block_start()) {
  const auto start = std::chrono::steady_clock::now();
  validate_partition(problem.graph, partition_);
  locals_.reserve(static_cast<size_t>(partition_.num_subgraphs()));
  for (int i = 0; i < partition_.num_subgraphs(); ++i) locals_.push_back(build_local(problem, partition_, i));
  setup_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vector SchurOperator::restrict_to(int i, const Vector& u_gamma) const {
  const LocalSystem& ls = local(i);
  Vector r(ls.num_interface());
  for (int k = 0; k < ls.num_interface(); ++k) r[k] = u_gamma[ls.interface_slots[static_cast<size_t>(k)]];
  return r;
}

void SchurOperator::add_from(int i, const Vector& local_values, Vector& u_gamma) const {
  const LocalSystem& ls = local(i);
  for (int k = 0; k < ls.num_interface(); ++k) u_gamma[ls.interface_slots[static_cast<size_t>(k)]] += local_values[k];
}

void SchurOperator::apply(const Vector& x, Vector& y) const {
  if (x.size() != size())
    throw std::invalid_argument("Schur apply: expected vector of size " + std::to_string(size()) + ", got " +
                                std::to_string(x.size()));
  y.setZero(size());
  for (int i = 0; i < num_subgraphs(); ++i) {
    const LocalSystem& ls = locals_[static_cast<size_t>(i)];
    if (ls.num_interface() == 0) continue;
    const Vector u = restrict_to(i, x);
    const Vector interior = ls.dirichlet->solve(ls.A_IG * u);
    const Vector yi = ls.A_GG * u - ls.A_IG.transpose() * interior;
    add_from(i, yi, y);
  }
}

Vector SchurOperator::local_rhs(int i) const {
  const LocalSystem& ls = local(i);
  const Vector interior = ls.dirichlet->solve(ls.f_I);
  return ls.f_G - ls.A_IG.transpose() * interior;
}

Vector SchurOperator::rhs() const {
  Vector g = Vector::Zero(size());
  for (int i = 0; i < num_subgraphs(); ++i)
    if (local(i).num_interface() > 0) add_from(i, local_rhs(i), g);
  return g;
}

namespace {

Vector gather(const Vector& load, const std::vector<int>& dofs) {
  Vector out(static_cast<Eigen::Index>(dofs.size()));
  for (size_t k = 0; k < dofs.size(); ++k) out[static_cast<Eigen::Index>(k)] = load[dofs[k]];
  return out;
}

}  // namespace

Vector SchurOperator::rhs(const Vector& load) const {
  if (load.size() != num_dofs_) throw std::invalid_argument("Schur rhs: load vector size mismatch");
  Vector g(size());
  for (size_t k = 0; k < partition_.interface.size(); ++k)
    g[static_cast<Eigen::Index>(k)] = load[vertex_block_start_ + partition_.interface[k]];
  for (int i = 0; i < num_subgraphs(); ++i) {
    const LocalSystem& ls = local(i);
    if (ls.num_interface() == 0) continue;
    const Vector interior = ls.dirichlet->solve(gather(load, ls.interior_dofs));
    add_from(i, -(ls.A_IG.transpose() * interior), g);
  }
  return g;
}

Vector SchurOperator::harmonic_extension(const Vector& u_gamma, bool with_load) const {
  if (u_gamma.size() != size()) throw std::invalid_argument("harmonic extension: interface size mismatch");
  Vector u = Vector::Zero(num_dofs_);
  for (int i = 0; i < num_subgraphs(); ++i) {
    const LocalSystem& ls = locals_[static_cast<size_t>(i)];
    Vector rhs = -(ls.A_IG * restrict_to(i, u_gamma));
    if (with_load) rhs += ls.f_I;
    const Vector interior = ls.dirichlet->solve(rhs);
    for (int k = 0; k < ls.num_interior(); ++k) u[ls.interior_dofs[static_cast<size_t>(k)]] = interior[k];
  }
  for (size_t k = 0; k < partition_.interface.size(); ++k)
    u[vertex_block_start_ + partition_.interface[k]] = u_gamma[static_cast<Eigen::Index>(k)];
  return u;
}

Vector SchurOperator::harmonic_extension(const Vector& u_gamma, const Vector& load) const {
  if (u_gamma.size() != size()) throw std::invalid_argument("harmonic extension: interface size mismatch");
  if (load.size() != num_dofs_) throw std::invalid_argument("harmonic extension: load vector size mismatch");
  Vector u = Vector::Zero(num_dofs_);
  for (int i = 0; i < num_subgraphs(); ++i) {
    const LocalSystem& ls = locals_[static_cast<size_t>(i)];
    const Vector rhs = gather(load, ls.interior_dofs) - ls.A_IG * restrict_to(i, u_gamma);
    const Vector interior = ls.dirichlet->solve(rhs);
    for (int k = 0; k < ls.num_interior(); ++k) u[ls.interior_dofs[static_cast<size_t>(k)]] = interior[k];
  }
  for (size_t k = 0; k < partition_.interface.size(); ++k)
    u[vertex_block_start_ + partition_.interface[k]] = u_gamma[static_cast<Eigen::Index>(k)];
  return u;
}

Vector SchurOperator::local_neumann_solve(int i, const Vector& r_local) const {
  const LocalSystem& ls = local(i);
  Vector rhs = Vector::Zero(ls.num_interior() + ls.num_interface());
  rhs.tail(ls.num_interface()) = r_local;
  const Vector w = ls.neumann->solve(rhs);
  return w.tail(ls.num_interface());
}

Eigen::MatrixXd SchurOperator::assemble_dense() const {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(size(), size());
  for (int i = 0; i < num_subgraphs(); ++i) {
    const LocalSystem& ls = local(i);
    if (ls.num_interface() == 0) continue;
    const Eigen::MatrixXd si = local_schur_dense(ls);
    for (int a = 0; a < ls.num_interface(); ++a)
      for (int b = 0; b < ls.num_interface(); ++b)
        s(ls.interface_slots[static_cast<size_t>(a)], ls.interface_slots[static_cast<size_t>(b)]) += si(a, b);
  }
  return s;
}

}  // namespace qgdd
