#include "qgdd/studies.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <random>
#include <ostream>

#include "qgdd/substructuring.hpp"

namespace qgdd {

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "bicgstab") return SolverKind::BiCGSTAB;
  if (name == "pcg" || name == "cg") return SolverKind::PCG;
  if (name == "richardson") return SolverKind::Richardson;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "' (bicgstab, pcg, richardson)");
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::BiCGSTAB: return "bicgstab";
    case SolverKind::PCG: return "pcg";
    case SolverKind::Richardson: return "richardson";
  }
  return "?";
}

namespace {

SolveResult run_solver(const SchurOperator& op, const Preconditioner& prec, const Vector& g,
                       const SchurSolveOptions& options) {
  switch (options.solver) {
    case SolverKind::BiCGSTAB: return bicgstab(op, prec, g, options.rule);
    case SolverKind::PCG: return pcg(op, prec, g, options.rule);
    case SolverKind::Richardson: return richardson(op, prec, g, options.theta, options.rule);
  }
  throw std::logic_error("unreachable");
}

SchurSolveOutcome solve_on(const SchurOperator& op, const SchurSolveOptions& options) {
  SchurSolveOutcome out;
  out.operator_setup_seconds = op.setup_seconds();
  out.interface_size = static_cast<int>(op.size());
  const Vector g = op.rhs();
  if (op.size() == 0) {
    // Single subgraph: the whole problem is one local solve.
    out.u_gamma = Vector(0);
    out.report.solver = to_string(options.solver);
    out.report.converged = true;
    out.report.status = SolveStatus::Converged;
    out.report.residual_history = {0.0};
  } else {
    const Preconditioner prec(options.prec, op, PrecOptions{options.nn_scaled});
    out.prec_setup_seconds = prec.setup_seconds();
    SolveResult res = run_solver(op, prec, g, options);
    out.u_gamma = std::move(res.x);
    out.report = std::move(res.report);
  }
  out.u = op.harmonic_extension(out.u_gamma, true);
  return out;
}

}  // namespace

SchurSolveOutcome solve_schur(const Problem& problem, const Partition& partition, const SchurSolveOptions& options) {
  const SchurOperator op(problem, partition);
  return solve_on(op, options);
}

MetricGraph family_graph(const std::string& family, int param, int ba_m, std::uint64_t seed) {
  if (family == "dgm") return dgm(param);
  if (family == "ba") return barabasi_albert(param, ba_m, seed);
  if (family == "star") return star(param);
  if (family == "path") return path(param);
  throw ConfigError("unknown graph family '" + family + "' (dgm, ba, star, path)");
}

// --- benchmark sweep ----------------------------------------------------------

Vector random_load_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (auto& x : v) x = dist(engine);
  return v;
}

void validate_bench_spec(const BenchSpec& spec) {
  if (spec.params.empty()) throw ConfigError("bench: empty graph parameter list");
  if (spec.log2_levels.empty()) throw ConfigError("bench: empty mesh level list");
  if (spec.precs.empty()) throw ConfigError("bench: empty preconditioner list");
  for (int level : spec.log2_levels)
    if (level < 1 || level > 30) throw ConfigError("bench: mesh level out of range: " + std::to_string(level));
  for (const auto* s : {&spec.c, &spec.p, &spec.f}) {
    try {
      (void)parse_expr(*s);
    } catch (const ExprSyntaxError& ex) {
      throw ConfigError(std::string("bench: bad coefficient: ") + ex.what());
    }
  }
  if (spec.family != "dgm" && spec.family != "ba" && spec.family != "star" && spec.family != "path")
    throw ConfigError("bench: unknown graph family '" + spec.family + "'");
}

namespace {

std::optional<double> preconditioned_kappa(const SchurOperator& op, const Preconditioner& prec) {
  try {
    if (prec.kind() == PrecKind::None) return cond_estimate(op).kappa;
    const ProductOperator m_inv_s(op, prec);
    const IdentityOperator identity(op.size());
    StoppingRule inner;
    inner.tolerance = 1e-11;
    inner.max_iterations = 20000;
    return cond_estimate(m_inv_s,
                         [&](const Vector& x) {
                           SolveResult r = bicgstab(m_inv_s, identity, x, inner);
                           if (!r.report.converged) throw std::runtime_error("inner solve failed");
                           return r.x;
                         })
        .kappa;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchSpec& spec) {
  validate_bench_spec(spec);
  std::vector<BenchRow> rows;
  const Expr c = parse_expr(spec.c), p = parse_expr(spec.p), f = parse_expr(spec.f);
  for (int param : spec.params) {
    const MetricGraph g = family_graph(spec.family, param, spec.ba_m, spec.seed);
    const Partition part = partition_by_edges(g);
    for (int level : spec.log2_levels) {
      const Problem problem(g, build_mesh(g, std::ldexp(1.0, -level)), c, p, f);
      const SchurOperator op(problem, part);
      const Vector rhs = spec.random_load ? op.rhs(random_load_vector(op.num_dofs(), spec.seed)) : op.rhs();
      for (PrecKind kind : spec.precs) {
        BenchRow row;
        row.family = spec.family;
        row.param = param;
        row.n_vertices = g.num_vertices();
        row.n_edges = g.num_edges();
        row.log2_inv_h = level;
        row.prec = kind;
        row.solver = spec.solver;
        try {
          const Preconditioner prec(kind, op);
          SchurSolveOptions options;
          options.prec = kind;
          options.solver = spec.solver;
          options.rule = spec.rule;
          options.theta = spec.theta;
          const SolveResult res = run_solver(op, prec, rhs, options);
          row.iters = res.report.iterations;
          row.converged = res.report.converged;
          row.matvecs = res.report.matvecs;
          row.prec_setup_seconds = prec.setup_seconds();
          row.solve_seconds = res.report.wall_time;
          row.seconds = row.prec_setup_seconds + row.solve_seconds;
          if (spec.with_cond) row.kappa = preconditioned_kappa(op, prec);
        } catch (const std::exception&) {
          row.converged = false;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const BenchSpec& spec, const std::vector<BenchRow>& rows) {
  out << "# c=" << spec.c << "; p=" << spec.p << "; f=" << (spec.random_load ? "random" : spec.f) << "; seed=" << spec.seed
      << "; tol=" << spec.rule.tolerance << "\n";
  out << "family,param,n_vertices,n_edges,log2_inv_h,prec,solver,iters,converged,seconds,matvecs";
  if (spec.with_cond) out << ",kappa";
  out << '\n';
  for (const BenchRow& r : rows) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3f", r.seconds);
    out << r.family << ',' << r.param << ',' << r.n_vertices << ',' << r.n_edges << ',' << r.log2_inv_h << ','
        << to_string(r.prec) << ',' << to_string(r.solver) << ',' << r.iters << ','
        << (r.converged ? "true" : "false") << ',' << secs << ',' << r.matvecs;
    if (spec.with_cond) {
      out << ',';
      if (r.kappa) out << std::setprecision(6) << *r.kappa;
    }
    out << '\n';
  }
}

void print_bench_table(std::ostream& out, const BenchSpec& spec, const std::vector<BenchRow>& rows) {
  out << std::left << std::setw(10) << "graph" << std::setw(12) << "log2(1/h)";
  for (PrecKind k : spec.precs) out << std::right << std::setw(10) << to_string(k);
  out << std::right << "   seconds\n";
  size_t i = 0;
  while (i < rows.size()) {
    const BenchRow& first = rows[i];
    out << std::left << std::setw(10) << (spec.family + "(" + std::to_string(first.param) + ")") << std::setw(12)
        << first.log2_inv_h;
    std::string times;
    for (size_t k = 0; k < spec.precs.size() && i < rows.size(); ++k, ++i) {
      const BenchRow& r = rows[i];
      out << std::right << std::setw(10) << (r.converged ? std::to_string(r.iters) : "-");
      char buf[32];
      std::snprintf(buf, sizeof buf, " %.3f", r.seconds);
      times += buf;
    }
    out << "  " << times << '\n';
  }
}

// --- FEM convergence ----------------------------------------------------------

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceStudy run_convergence(const ProblemConfig& config, const std::vector<int>& levels) {
  if (!config.exact) throw ConfigError("convergence study needs an \"exact\" solution");
  if (levels.empty()) throw ConfigError("convergence study needs at least one mesh level");
  ConvergenceStudy study;
  std::vector<double> hs, l2s, h1s;
  for (int level : levels) {
    const Problem problem = make_problem(config, std::ldexp(1.0, -level));
    const Vector u = solve_direct(assemble(problem));
    const ErrorNorms err = error_norms(problem, u, *config.exact, config.exact_dx);
    study.rows.push_back({level, problem.mesh.h_max, err.l2, err.h1});
    hs.push_back(problem.mesh.h_max);
    l2s.push_back(err.l2);
    h1s.push_back(err.h1);
  }
  // Below this the errors are rounding noise and a slope means nothing.
  constexpr double kNoise = 1e-11;
  const bool resolved = levels.size() >= 2 && *std::min_element(l2s.begin(), l2s.end()) > kNoise;
  if (resolved) {
    study.l2_order = fitted_order(hs, l2s);
    study.h1_order = fitted_order(hs, h1s);
  }
  return study;
}

void write_convergence_csv(std::ostream& out, const ConvergenceStudy& study) {
  out << "log2_inv_h,h,l2_err,h1_err,l2_rate,h1_rate\n";
  for (size_t i = 0; i < study.rows.size(); ++i) {
    const auto& r = study.rows[i];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%.10g,%.6e,%.6e", r.log2_inv_h, r.h, r.l2, r.h1);
    out << buf;
    if (i > 0 && study.l2_order) {
      const auto& q = study.rows[i - 1];
      std::snprintf(buf, sizeof buf, ",%.4f,%.4f", std::log(q.l2 / r.l2) / std::log(q.h / r.h),
                    std::log(q.h1 / r.h1) / std::log(q.h / r.h));
      out << buf;
    } else {
      out << ",,";
    }
    out << '\n';
  }
  out << "# fitted l2_order=" << (study.l2_order ? std::to_string(*study.l2_order) : "n/a")
      << " h1_order=" << (study.h1_order ? std::to_string(*study.h1_order) : "n/a") << '\n';
}

// --- conditioning -------------------------------------------------------------

std::vector<CondRow> run_cond(const ProblemConfig& config, const std::vector<int>& levels, PrecKind prec,
                              const EigenOptions& options) {
  std::vector<CondRow> rows;
  const Partition part = partition_by_edges(config.graph);
  for (int level : levels) {
    const Problem problem = make_problem(config, std::ldexp(1.0, -level));
    const SchurOperator op(problem, part);
    if (op.size() == 0) throw ConfigError("cond: interface is empty");
    CondRow row;
    row.log2_inv_h = level;
    row.interface_size = static_cast<int>(op.size());
    if (prec == PrecKind::None) {
      row.estimate = cond_estimate(op, options);
    } else {
      const Preconditioner m(prec, op);
      const ProductOperator m_inv_s(op, m);
      const IdentityOperator identity(op.size());
      StoppingRule inner;
      inner.tolerance = 1e-11;
      inner.max_iterations = 20000;
      row.estimate = cond_estimate(
          m_inv_s,
          [&](const Vector& x) {
            SolveResult r = bicgstab(m_inv_s, identity, x, inner);
            if (!r.report.converged) throw std::runtime_error("cond: inner solve failed");
            return r.x;
          },
          options);
    }
    rows.push_back(row);
  }
  return rows;
}

void write_cond_csv(std::ostream& out, PrecKind prec, const std::vector<CondRow>& rows) {
  out << "log2_inv_h,interface_size,prec,lambda_max,lambda_min,kappa\n";
  for (const auto& r : rows) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%d,%d,%s,%.8e,%.8e,%.6f", r.log2_inv_h, r.interface_size, to_string(prec).c_str(),
                  r.estimate.lambda_max, r.estimate.lambda_min, r.estimate.kappa);
    out << buf << '\n';
  }
}

}  // namespace qgdd
