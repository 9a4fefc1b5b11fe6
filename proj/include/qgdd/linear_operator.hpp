#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qgdd {

/// Square matrix-free linear map. `apply` must not alias x and y.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual Eigen::Index size() const = 0;
  virtual void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const = 0;

  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y(size());
    apply(x, y);
    return y;
  }
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(Eigen::Index n) : n_(n) {}
  Eigen::Index size() const override { return n_; }
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const override { y = x; }

 private:
  Eigen::Index n_;
};

/// Wraps any Eigen matrix expression type supporting `matrix * vector`.
template <typename Matrix>
class MatrixOperator final : public LinearOperator {
 public:
  explicit MatrixOperator(Matrix m) : m_(std::move(m)) {}
  Eigen::Index size() const override { return m_.rows(); }
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const override { y.noalias() = m_ * x; }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

/// Composition first-then-second: y = second(first(x)).
class ProductOperator final : public LinearOperator {
 public:
  ProductOperator(const LinearOperator& first, const LinearOperator& second) : first_(first), second_(second) {}
  Eigen::Index size() const override { return first_.size(); }
  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const override {
    Eigen::VectorXd tmp(first_.size());
    first_.apply(x, tmp);
    second_.apply(tmp, y);
  }

 private:
  const LinearOperator& first_;
  const LinearOperator& second_;
};

/// Dense matrix of an operator, column by column. Only for small sizes.
inline Eigen::MatrixXd to_dense(const LinearOperator& op) {
  const Eigen::Index n = op.size();
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n), y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    e[j] = 1.0;
    op.apply(e, y);
    m.col(j) = y;
    e[j] = 0.0;
  }
  return m;
}

}  // namespace qgdd
