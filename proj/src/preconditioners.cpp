#include "qgdd/preconditioners.hpp"

#include <chrono>
#include <stdexcept>

namespace qgdd {

PrecKind parse_prec_kind(std::string_view name) {
  if (name == "none") return PrecKind::None;
  if (name == "diag" || name == "diagonal") return PrecKind::Diagonal;
  if (name == "poly" || name == "polynomial") return PrecKind::Polynomial;
  if (name == "nn" || name == "neumann-neumann") return PrecKind::NeumannNeumann;
  throw std::invalid_argument("unknown preconditioner '" + std::string(name) + "' (none, diag, poly, nn)");
}

std::string to_string(PrecKind kind) {
  switch (kind) {
    case PrecKind::None: return "none";
    case PrecKind::Diagonal: return "diag";
    case PrecKind::Polynomial: return "poly";
    case PrecKind::NeumannNeumann: return "nn";
  }
  return "?";
}

Vector schur_diagonal(const SchurOperator& op) {
  Vector d = Vector::Zero(op.size());
  for (int i = 0; i < op.num_subgraphs(); ++i) {
    const LocalSystem& ls = op.local(i);
    if (ls.num_interface() == 0) continue;
    // Only diagonal entries are needed, but each still costs one Dirichlet solve.
    op.add_from(i, local_schur_dense(ls).diagonal(), d);
  }
  for (Eigen::Index k = 0; k < d.size(); ++k)
    if (!(d[k] > 0.0))
      throw std::runtime_error("nonpositive Schur diagonal entry at interface index " + std::to_string(k));
  return d;
}

Preconditioner::Preconditioner(PrecKind kind, const SchurOperator& op, PrecOptions options)
    : kind_(kind), op_(op), options_(options) {
  const auto start = std::chrono::steady_clock::now();
  switch (kind_) {
    case PrecKind::None: break;
    case PrecKind::Diagonal:
    case PrecKind::Polynomial: diag_ = qgdd::schur_diagonal(op_); break;
    case PrecKind::NeumannNeumann: {
      const Partition& part = op_.partition();
      scaling_.resize(op_.size());
      for (size_t k = 0; k < part.interface.size(); ++k)
        scaling_[static_cast<Eigen::Index>(k)] =
            options_.scaled ? 1.0 / part.multiplicity[static_cast<size_t>(part.interface[k])] : 1.0;
      break;
    }
  }
  setup_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void Preconditioner::apply(const Vector& r, Vector& z) const {
  if (r.size() != size())
    throw std::invalid_argument("preconditioner apply: expected size " + std::to_string(size()) + ", got " +
                                std::to_string(r.size()));
  switch (kind_) {
    case PrecKind::None: z = r; return;
    case PrecKind::Diagonal: z = r.cwiseQuotient(diag_); return;
    case PrecKind::Polynomial: {
      const Vector y = r.cwiseQuotient(diag_);
      Vector sy(size());
      op_.apply(y, sy);
      // D^{-1} r + D^{-1}(D - S) D^{-1} r = 2 D^{-1} r - D^{-1} S D^{-1} r
      z = 2.0 * y - sy.cwiseQuotient(diag_);
      return;
    }
    case PrecKind::NeumannNeumann: {
      const Vector scaled = r.cwiseProduct(scaling_);
      z.setZero(size());
      for (int i = 0; i < op_.num_subgraphs(); ++i) {
        if (op_.local(i).num_interface() == 0) continue;
        op_.add_from(i, op_.local_neumann_solve(i, op_.restrict_to(i, scaled)), z);
      }
      z = z.cwiseProduct(scaling_);
      return;
    }
  }
}

Vector nn_richardson_step(const LinearOperator& op, const LinearOperator& prec, const Vector& g, const Vector& u,
                          double theta) {
  Vector su(op.size()), z(op.size());
  op.apply(u, su);
  prec.apply(g - su, z);
  return u + theta * z;
}

}  // namespace qgdd
