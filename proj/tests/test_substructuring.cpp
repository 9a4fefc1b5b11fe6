#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "qgdd/substructuring.hpp"

using namespace qgdd;

namespace {

// Pendant unit edge, two cells, c = p = 1. Element matrix [13/6, -23/12; -23/12, 13/6];
// eliminating the two interior nodes leaves 13/6 - (23/12)^2 * 312/823.
const double kPendantSchur = 13.0 / 6.0 - (23.0 / 12.0) * (23.0 / 12.0) * 312.0 / 823.0;

Problem uniform_problem(const MetricGraph& g, double h, const char* c, const char* p, const char* f) {
  return Problem(g, build_mesh(g, h), parse_expr(c), parse_expr(p), parse_expr(f));
}

double energy(const SparseMatrix& A, const Vector& u) { return u.dot(A * u); }

std::vector<MetricGraph> test_graphs() { return {path(2), star(3), dgm(2), dgm(3), barabasi_albert(50, 2, 6)}; }

}  // namespace

TEST_CASE("pendant edge local Schur complement") {
  // Close to the continuum value tanh(1) = 0.76159.
  CHECK(kPendantSchur == doctest::Approx(0.773998).epsilon(1e-5));
  const Problem prob = uniform_problem(path(2), 0.5, "1", "1", "0");
  const SchurOperator op(prob, partition_by_edges(prob.graph));
  REQUIRE(op.size() == 1);
  for (int i = 0; i < 2; ++i) {
    const LocalSystem& ls = op.local(i);
    CHECK(ls.num_interface() == 1);
    CHECK(ls.num_interior() == 2);
    const Eigen::MatrixXd s = local_schur_dense(ls);
    CHECK(s(0, 0) == doctest::Approx(kPendantSchur).epsilon(1e-14));
  }
  CHECK((local_schur_dense(op.local(0)) - local_schur_dense(op.local(1))).norm() == 0.0);

  const Vector one = Vector::Ones(1);
  CHECK((op * one)[0] == doctest::Approx(2.0 * kPendantSchur).epsilon(1e-14));
  CHECK((op * Vector::Zero(1))[0] == 0.0);
}

TEST_CASE("local system shapes") {
  const MetricGraph g = dgm(1);
  const Problem prob = uniform_problem(g, 0.5, "1", "1", "1");
  const SchurOperator op(prob, partition_by_edges(g));
  const LocalSystem& ls = op.local(0);
  CHECK(ls.A.rows() == 3);
  CHECK(ls.num_interface() == 2);
  CHECK(ls.A_GG.rows() == 2);
}

TEST_CASE("a single edge has an empty interface") {
  const Problem prob = uniform_problem(path(1), 0.25, "1", "1", "1");
  const SchurOperator op(prob, partition_by_edges(prob.graph));
  CHECK(op.size() == 0);
  CHECK(op.rhs().size() == 0);
  const Vector u = op.harmonic_extension(Vector(0), true);
  CHECK((u - solve_direct(assemble(prob))).norm() < 1e-12);
}

TEST_CASE("matrix-free S and g match dense elimination") {
  std::mt19937_64 rng(17);
  for (const MetricGraph& g : test_graphs()) {
    const Problem prob = uniform_problem(g, 0.25, "1", "1", "1");
    const Partition part = partition_by_edges(g);
    const SchurOperator op(prob, part);
    const oracle::DenseSystem ref = oracle::assemble_uniform(g, 4, 1.0, 1.0, 1.0);
    const oracle::Elimination el = oracle::eliminate(ref.A, ref.f, oracle::interface_dofs(part, ref.vertex_start));
    const Eigen::MatrixXd probed = to_dense(op);
    CHECK((probed - el.S).cwiseAbs().maxCoeff() < 1e-10 * el.S.cwiseAbs().maxCoeff());
    CHECK((op.rhs() - el.g).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((op.assemble_dense() - el.S).cwiseAbs().maxCoeff() < 1e-10 * el.S.cwiseAbs().maxCoeff());

    const Vector u = oracle::random_vector(op.size(), rng);
    const Vector v = oracle::random_vector(op.size(), rng);
    CHECK(std::abs(u.dot(op * v) - v.dot(op * u)) <= 1e-12 * u.norm() * v.norm() * probed.norm());
    CHECK(u.dot(op * u) > 0.0);
  }
}

TEST_CASE("constant solution identity on the two edge path") {
  const Problem prob = uniform_problem(path(2), 0.5, "1", "1", "1");
  const SchurOperator op(prob, partition_by_edges(prob.graph));
  CHECK(op.rhs()[0] == doctest::Approx((op * Vector::Ones(1))[0]).epsilon(1e-14));
}

TEST_CASE("zero load gives zero interface rhs") {
  const Problem prob = uniform_problem(dgm(3), 0.25, "1", "1", "0");
  const SchurOperator op(prob, partition_by_edges(prob.graph));
  CHECK(op.rhs().norm() == 0.0);
  CHECK(op.harmonic_extension(Vector::Zero(op.size()), true).norm() == 0.0);
}

TEST_CASE("subassembly of A over subgraphs") {
  const MetricGraph g = dgm(3);
  const Problem prob = uniform_problem(g, 0.2, "1 + x", "2", "x");
  const SparseSystem sys = assemble(prob);
  const SchurOperator op(prob, partition_by_edges(g));
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(sys.A.rows(), sys.A.cols());
  Vector load = Vector::Zero(sys.A.rows());
  for (int i = 0; i < op.num_subgraphs(); ++i) {
    const LocalSystem& ls = op.local(i);
    std::vector<int> global(ls.interior_dofs);
    for (VertexId v : ls.interface_vertices) global.push_back(prob.dofs.vertex(v));
    const Eigen::MatrixXd local(ls.A);
    for (size_t a = 0; a < global.size(); ++a) {
      load[global[a]] += a < ls.interior_dofs.size() ? ls.f_I[static_cast<Eigen::Index>(a)]
                                                     : ls.f_G[static_cast<Eigen::Index>(a - ls.interior_dofs.size())];
      for (size_t b = 0; b < global.size(); ++b)
        sum(global[a], global[b]) += local(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  CHECK((sum - Eigen::MatrixXd(sys.A)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((load - sys.rhs).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("S and g are sums of local contributions") {
  const MetricGraph g = barabasi_albert(60, 2, 2);
  const Problem prob = uniform_problem(g, 0.125, "1", "1 + x", "cos(x)");
  const SchurOperator op(prob, partition_by_edges(g));
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(op.size(), op.size());
  Vector gsum = Vector::Zero(op.size());
  for (int i = 0; i < op.num_subgraphs(); ++i) {
    const LocalSystem& ls = op.local(i);
    const Eigen::MatrixXd si = local_schur_dense(ls);
    const Vector gi = op.local_rhs(i);
    for (int a = 0; a < ls.num_interface(); ++a) {
      gsum[ls.interface_slots[static_cast<size_t>(a)]] += gi[a];
      for (int b = 0; b < ls.num_interface(); ++b)
        S(ls.interface_slots[static_cast<size_t>(a)], ls.interface_slots[static_cast<size_t>(b)]) += si(a, b);
    }
  }
  CHECK((S - to_dense(op)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((gsum - op.rhs()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("harmonic extension of the Schur solution is the direct solution") {
  for (const MetricGraph& g : test_graphs()) {
    const Problem prob = uniform_problem(g, 0.125, "1 + x", "0.5", "sin(3*x) + x");
    const SchurOperator op(prob, partition_by_edges(g));
    const Vector ug = to_dense(op).llt().solve(op.rhs());
    const Vector u = op.harmonic_extension(ug, true);
    const Vector direct = solve_direct(assemble(prob));
    CHECK((u - direct).norm() <= 1e-9 * direct.norm());
  }
}

TEST_CASE("interface rhs for an arbitrary load vector") {
  std::mt19937_64 rng(4);
  const MetricGraph g = dgm(3);
  const Problem prob = uniform_problem(g, 0.125, "1", "1", "1");
  const SparseSystem sys = assemble(prob);
  const Partition part = partition_by_edges(g);
  const SchurOperator op(prob, part);
  const Vector load = oracle::random_vector(sys.A.rows(), rng);
  const Eigen::MatrixXd A(sys.A);
  const oracle::Elimination el = oracle::eliminate(A, load, oracle::interface_dofs(part, sys.vertex_block_start));
  CHECK((op.rhs(load) - el.g).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((op.rhs(sys.rhs) - op.rhs()).cwiseAbs().maxCoeff() < 1e-13);

  const Vector ug = el.S.llt().solve(el.g);
  const Vector u = op.harmonic_extension(ug, load);
  const Vector direct = solve_direct(sys.A, load);
  CHECK((u - direct).norm() <= 1e-9 * direct.norm());
}

TEST_CASE("non per-edge partition") {
  const MetricGraph g = dgm(2);
  const Partition part = make_partition(g, {{0, 3, 4}, {1, 5, 6}, {2, 7, 8}});
  const Problem prob = uniform_problem(g, 0.25, "1", "1", "x");
  const SchurOperator op(prob, part);
  const oracle::DenseSystem ref = oracle::assemble(g, prob.mesh.intervals, std::vector<double>(9, 1.0),
                                                   std::vector<double>(9, 1.0), std::vector<double>(9, 0.0));
  const oracle::Elimination el = oracle::eliminate(ref.A, ref.f, oracle::interface_dofs(part, ref.vertex_start));
  CHECK((to_dense(op) - el.S).cwiseAbs().maxCoeff() < 1e-10);
  const Vector direct = solve_direct(assemble(prob));
  const Vector u = op.harmonic_extension(to_dense(op).llt().solve(op.rhs()), true);
  CHECK((u - direct).norm() <= 1e-9 * direct.norm());
}

TEST_CASE("energy identity and minimality of the harmonic extension") {
  std::mt19937_64 rng(23);
  const MetricGraph g = dgm(3);
  const Problem prob = uniform_problem(g, 0.125, "1", "1", "1");
  const SparseSystem sys = assemble(prob);
  const SchurOperator op(prob, partition_by_edges(g));
  for (int t = 0; t < 20; ++t) {
    const Vector ug = oracle::random_vector(op.size(), rng);
    const Vector u = op.harmonic_extension(ug, false);
    const double a = energy(sys.A, u);
    CHECK(std::abs(a - ug.dot(op * ug)) <= 1e-10 * a);

    Vector w = oracle::random_vector(u.size(), rng);
    for (VertexId v : op.partition().interface) w[prob.dofs.vertex(v)] = 0.0;
    for (double scale : {1.0, 1e-3}) CHECK(energy(sys.A, u + scale * w) >= a - 1e-12);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  const Problem prob = uniform_problem(path(2), 0.5, "1", "1", "1");
  const SchurOperator op(prob, partition_by_edges(prob.graph));
  Vector y;
  CHECK_THROWS_AS(op.apply(Vector::Zero(3), y), std::invalid_argument);
  CHECK_THROWS_AS(op.harmonic_extension(Vector::Zero(2), true), std::invalid_argument);
}

TEST_CASE("local Neumann solve inverts the local Schur complement") {
  const Problem prob = uniform_problem(dgm(2), 0.125, "1", "1", "1");
  const SchurOperator op(prob, partition_by_edges(prob.graph));
  for (int i = 0; i < op.num_subgraphs(); ++i) {
    const Eigen::MatrixXd s = local_schur_dense(op.local(i));
    const Vector r = Vector::LinSpaced(s.rows(), 1.0, 2.0);
    CHECK((s * op.local_neumann_solve(i, r) - r).norm() < 1e-12);
  }
}
