#include "qgdd/krylov.hpp"

#include <chrono>
#include <random>
#include <stdexcept>

namespace qgdd {

using Eigen::VectorXd;

namespace {

using Clock = std::chrono::steady_clock;

// Bookkeeping shared by the three iterations.
class Run {
 public:
  Run(const char* name, const LinearOperator& A, const LinearOperator& M, const VectorXd& b)
      : A_(A), M_(M), start_(Clock::now()) {
    if (A.size() != b.size() || M.size() != b.size())
      throw std::invalid_argument(std::string(name) + ": operator and right-hand side sizes differ");
    result_.report.solver = name;
    bnorm_ = b.norm();
  }

  VectorXd matvec(const VectorXd& x) {
    ++result_.report.matvecs;
    VectorXd y(x.size());
    A_.apply(x, y);
    return y;
  }
  VectorXd precondition(const VectorXd& r) {
    ++result_.report.precond_applies;
    VectorXd z(r.size());
    M_.apply(r, z);
    return z;
  }
  double relative(const VectorXd& r) const { return r.norm() / bnorm_; }
  double bnorm() const { return bnorm_; }
  SolveReport& report() { return result_.report; }
  void record(double res) { result_.report.residual_history.push_back(res); }

  SolveResult finish(VectorXd x, SolveStatus status, std::string message = {}) {
    auto& rep = result_.report;
    rep.status = status;
    rep.converged = status == SolveStatus::Converged;
    rep.message = std::move(message);
    rep.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();
    result_.x = std::move(x);
    return std::move(result_);
  }

 private:
  const LinearOperator& A_;
  const LinearOperator& M_;
  Clock::time_point start_;
  SolveResult result_;
  double bnorm_ = 0.0;
};

VectorXd initial_guess(const VectorXd& b, const VectorXd& x0) {
  if (x0.size() == 0) return VectorXd::Zero(b.size());
  if (x0.size() != b.size()) throw std::invalid_argument("initial guess has wrong size");
  return x0;
}

constexpr int kMaxDriftRestarts = 5;

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max_iterations";
    case SolveStatus::Breakdown: return "breakdown";
    case SolveStatus::Indefinite: return "indefinite";
    case SolveStatus::Diverged: return "diverged";
  }
  return "?";
}

SolveResult bicgstab(const LinearOperator& A, const LinearOperator& prec, const VectorXd& b, const StoppingRule& rule,
                     const VectorXd& x0) {
  Run run("bicgstab", A, prec, b);
  VectorXd x = initial_guess(b, x0);
  if (run.bnorm() == 0.0) {
    run.record(0.0);
    return run.finish(VectorXd::Zero(b.size()), SolveStatus::Converged);
  }
  VectorXd r = x0.size() == 0 ? b : VectorXd(b - run.matvec(x));
  run.record(run.relative(r));
  if (run.relative(r) <= rule.tolerance) return run.finish(std::move(x), SolveStatus::Converged);

  VectorXd r_hat = r, p = VectorXd::Zero(b.size()), v = VectorXd::Zero(b.size());
  double rho_old = 1.0, alpha = 1.0, omega = 1.0;
  bool fresh = true;
  int breakdowns = 0, drift_restarts = 0;
  auto& rep = run.report();
  constexpr double tiny = 1e-300;

  // Returns true if the caller should continue after restarting from x.
  auto restart = [&]() {
    r = b - run.matvec(x);
    r_hat = r;
    p.setZero();
    v.setZero();
    fresh = true;
    ++rep.restarts;
  };
  // Confirms a small recursive residual against b - A x. Returns true if converged.
  auto confirm = [&]() {
    const VectorXd true_r = b - run.matvec(x);
    const double res = run.relative(true_r);
    rep.residual_history.back() = res;
    return res <= rule.tolerance;
  };

  while (rep.iterations < rule.max_iterations) {
    const double rho = r_hat.dot(r);
    if (std::abs(rho) <= tiny || std::abs(rho) <= 1e-14 * r_hat.norm() * r.norm()) {
      if (breakdowns++ > 0) return run.finish(std::move(x), SolveStatus::Breakdown, "rho vanished twice");
      restart();
      continue;
    }
    if (fresh) {
      p = r;
      fresh = false;
    } else {
      const double beta = (rho / rho_old) * (alpha / omega);
      p = r + beta * (p - omega * v);
    }
    const VectorXd p_hat = run.precondition(p);
    v = run.matvec(p_hat);
    const double denom = r_hat.dot(v);
    if (std::abs(denom) <= tiny) {
      if (breakdowns++ > 0) return run.finish(std::move(x), SolveStatus::Breakdown, "r_hat^T v vanished twice");
      restart();
      continue;
    }
    alpha = rho / denom;
    VectorXd s = r - alpha * v;
    ++rep.iterations;

    if (run.relative(s) <= rule.tolerance) {
      x += alpha * p_hat;
      run.record(run.relative(s));
      if (confirm()) return run.finish(std::move(x), SolveStatus::Converged);
      if (drift_restarts++ >= kMaxDriftRestarts)
        return run.finish(std::move(x), SolveStatus::Breakdown, "recursive residual drifted from true residual");
      restart();
      continue;
    }

    const VectorXd s_hat = run.precondition(s);
    const VectorXd t = run.matvec(s_hat);
    const double tt = t.squaredNorm();
    omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
    x += alpha * p_hat + omega * s_hat;
    r = s - omega * t;
    run.record(run.relative(r));

    if (run.relative(r) <= rule.tolerance) {
      if (confirm()) return run.finish(std::move(x), SolveStatus::Converged);
      if (drift_restarts++ >= kMaxDriftRestarts)
        return run.finish(std::move(x), SolveStatus::Breakdown, "recursive residual drifted from true residual");
      restart();
      continue;
    }
    if (std::abs(omega) <= tiny) {
      if (breakdowns++ > 0) return run.finish(std::move(x), SolveStatus::Breakdown, "omega vanished twice");
      restart();
      continue;
    }
    rho_old = rho;
  }
  return run.finish(std::move(x), SolveStatus::MaxIterations,
                    "no convergence in " + std::to_string(rule.max_iterations) + " iterations");
}

SolveResult pcg(const LinearOperator& A, const LinearOperator& prec, const VectorXd& b, const StoppingRule& rule,
                const VectorXd& x0) {
  Run run("pcg", A, prec, b);
  VectorXd x = initial_guess(b, x0);
  if (run.bnorm() == 0.0) {
    run.record(0.0);
    return run.finish(VectorXd::Zero(b.size()), SolveStatus::Converged);
  }
  VectorXd r = x0.size() == 0 ? b : VectorXd(b - run.matvec(x));
  run.record(run.relative(r));
  if (run.relative(r) <= rule.tolerance) return run.finish(std::move(x), SolveStatus::Converged);

  auto& rep = run.report();
  VectorXd z = run.precondition(r);
  VectorXd p = z;
  double rz = r.dot(z);
  while (rep.iterations < rule.max_iterations) {
    const VectorXd q = run.matvec(p);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) return run.finish(std::move(x), SolveStatus::Indefinite, "p^T A p <= 0");
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    ++rep.iterations;
    run.record(run.relative(r));
    if (run.relative(r) <= rule.tolerance) {
      r = b - run.matvec(x);
      rep.residual_history.back() = run.relative(r);
      if (run.relative(r) <= rule.tolerance) return run.finish(std::move(x), SolveStatus::Converged);
    }
    z = run.precondition(r);
    const double rz_new = r.dot(z);
    if (!(rz_new > 0.0) && r.squaredNorm() > 0.0)
      return run.finish(std::move(x), SolveStatus::Indefinite, "r^T M^{-1} r <= 0");
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  return run.finish(std::move(x), SolveStatus::MaxIterations,
                    "no convergence in " + std::to_string(rule.max_iterations) + " iterations");
}

SolveResult richardson(const LinearOperator& A, const LinearOperator& prec, const VectorXd& b, double theta,
                       const StoppingRule& rule, const VectorXd& x0) {
  if (!(theta > 0.0)) throw std::invalid_argument("richardson: theta must be positive");
  Run run("richardson", A, prec, b);
  VectorXd x = initial_guess(b, x0);
  if (run.bnorm() == 0.0) {
    run.record(0.0);
    return run.finish(VectorXd::Zero(b.size()), SolveStatus::Converged);
  }
  VectorXd r = x0.size() == 0 ? b : VectorXd(b - run.matvec(x));
  const double initial = run.relative(r);
  run.record(initial);
  if (initial <= rule.tolerance) return run.finish(std::move(x), SolveStatus::Converged);

  auto& rep = run.report();
  while (rep.iterations < rule.max_iterations) {
    x += theta * run.precondition(r);
    r = b - run.matvec(x);
    ++rep.iterations;
    const double res = run.relative(r);
    run.record(res);
    if (res <= rule.tolerance) return run.finish(std::move(x), SolveStatus::Converged);
    if (res > 10.0 * initial || !std::isfinite(res))
      return run.finish(std::move(x), SolveStatus::Diverged, "residual grew above 10x its initial value");
  }
  return run.finish(std::move(x), SolveStatus::MaxIterations,
                    "no convergence in " + std::to_string(rule.max_iterations) + " iterations");
}

namespace {

VectorXd random_unit(Eigen::Index n, unsigned long long seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = dist(engine);
  return x.normalized();
}

// Power iteration on `step`; returns the converged Rayleigh quotient x^T step(x).
double rayleigh_iteration(const std::function<VectorXd(const VectorXd&)>& step, VectorXd x,
                          const EigenOptions& options, int& iterations, const char* what) {
  double estimate = 0.0;
  for (iterations = 1; iterations <= options.max_iterations; ++iterations) {
    const VectorXd y = step(x);
    const double next = x.dot(y);
    const double ynorm = y.norm();
    if (ynorm == 0.0) throw std::runtime_error(std::string(what) + ": operator annihilated the iterate");
    if (iterations > 1 && std::abs(next - estimate) <= options.tolerance * std::abs(next)) return next;
    estimate = next;
    x = y / ynorm;
  }
  throw std::runtime_error(std::string(what) + " did not converge in " + std::to_string(options.max_iterations) +
                           " iterations");
}

}  // namespace

ConditionEstimate cond_estimate(const LinearOperator& A, const std::function<VectorXd(const VectorXd&)>& solve,
                                const EigenOptions& options) {
  ConditionEstimate est;
  if (A.size() == 0) throw std::invalid_argument("cond_estimate: empty operator");
  const VectorXd start = random_unit(A.size(), options.seed);
  est.lambda_max = rayleigh_iteration([&](const VectorXd& x) { return A * x; }, start, options,
                                      est.power_iterations, "power iteration");
  const double inv = rayleigh_iteration(solve, start, options, est.inverse_iterations, "inverse iteration");
  est.lambda_min = 1.0 / inv;
  est.kappa = est.lambda_max / est.lambda_min;
  return est;
}

ConditionEstimate cond_estimate(const LinearOperator& A, const EigenOptions& options) {
  const IdentityOperator identity(A.size());
  StoppingRule rule;
  rule.tolerance = 1e-12;
  rule.max_iterations = 100000;
  return cond_estimate(
      A,
      [&](const VectorXd& x) {
        SolveResult res = pcg(A, identity, x, rule);
        if (!res.report.converged) throw std::runtime_error("cond_estimate: inner CG failed: " + res.report.message);
        return res.x;
      },
      options);
}

}  // namespace qgdd
