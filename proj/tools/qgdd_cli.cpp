// Command-line driver: generate, solve, bench, convergence, cond.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qgdd/fem.hpp"
#include "qgdd/graph.hpp"
#include "qgdd/io.hpp"
#include "qgdd/studies.hpp"

namespace {

using namespace qgdd;
using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

// "5..9" or "4,6,8" or "6".
std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const int lo = std::stoi(text.substr(0, dots)), hi = std::stoi(text.substr(dots + 2));
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoi(item));
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

struct SolveFlags {
  std::string config;
  bool direct = false;
  std::string prec = "nn";
  std::string solver = "bicgstab";
  double tol = kSchurSolveTolerance;
  int maxit = 10000;
  double theta = 0.5;
  bool nn_unscaled = false;
  std::string out;
  std::string report;
  std::string dump_matrix;
  std::string dump_schur;
};

int cmd_solve(const SolveFlags& flags) {
  const ProblemConfig cfg = read_problem_config(flags.config);
  const Problem problem = make_problem(cfg);
  json report;
  report["n_vertices"] = problem.graph.num_vertices();
  report["n_edges"] = problem.graph.num_edges();
  report["dofs"] = problem.dofs.size();
  report["h_max"] = problem.mesh.h_max;

  Vector u;
  int status = 0;
  if (flags.direct || !flags.dump_matrix.empty()) {
    const SparseSystem sys = assemble(problem);
    if (!flags.dump_matrix.empty()) {
      std::ofstream mm(flags.dump_matrix);
      write_matrix_market(mm, sys.A);
    }
    if (flags.direct) {
      u = solve_direct(sys);
      report["method"] = "direct";
      report["relative_residual"] = (sys.A * u - sys.rhs).norm() / std::max(sys.rhs.norm(), 1e-300);
    }
  }
  if (!flags.direct) {
    SchurSolveOptions opts;
    opts.prec = parse_prec_kind(flags.prec);
    opts.solver = parse_solver_kind(flags.solver);
    opts.rule.tolerance = flags.tol;
    opts.rule.max_iterations = flags.maxit;
    opts.theta = flags.theta;
    opts.nn_scaled = !flags.nn_unscaled;
    const Partition part = partition_by_edges(problem.graph);
    if (!flags.dump_schur.empty()) {
      const SchurOperator op(problem, part);
      if (op.size() > 1000) throw ConfigError("--dump-schur supports interfaces up to 1000 vertices");
      std::ofstream s(flags.dump_schur + ".S.mtx"), g(flags.dump_schur + ".g.mtx");
      write_matrix_market(s, op.assemble_dense());
      write_matrix_market(g, op.rhs());
    }
    const SchurSolveOutcome out = solve_schur(problem, part, opts);
    u = out.u;
    report["method"] = "schur";
    report["prec"] = to_string(opts.prec);
    report["interface_size"] = out.interface_size;
    report["operator_setup_seconds"] = out.operator_setup_seconds;
    report["prec_setup_seconds"] = out.prec_setup_seconds;
    report["solve"] = report_to_json(out.report);
    if (!out.report.converged) status = kExitNumerical;
    std::cout << "interface " << out.interface_size << ", " << out.report.solver << " + " << to_string(opts.prec)
              << ": " << out.report.iterations << " iterations, residual " << out.report.final_residual() << ", "
              << to_string(out.report.status) << '\n';
  }
  if (cfg.exact) {
    const ErrorNorms err = error_norms(problem, u, *cfg.exact, cfg.exact_dx);
    report["l2_error"] = err.l2;
    report["h1_error"] = err.h1;
    std::cout << "L2 error " << err.l2 << ", H1 error " << err.h1 << '\n';
  }
  if (!flags.out.empty()) {
    std::ofstream out(flags.out);
    out << "dof,value\n";
    char buf[64];
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%ld,%.17g\n", static_cast<long>(i), u[i]);
      out << buf;
    }
  }
  if (!flags.report.empty()) {
    std::ofstream out(flags.report);
    out << report.dump(2) << '\n';
  } else if (flags.out.empty()) {
    report.erase("solve");
    std::cout << report.dump(2) << '\n';
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Elliptic problems on metric graphs: FEM, Schur complement, Neumann-Neumann"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a generated graph as JSON");
  std::string family;
  int level = 0, n = 100, m_attach = 2, leaves = 3;
  std::uint64_t seed = 1;
  std::string gen_out;
  gen->add_option("family", family, "dgm | ba | star | path")->required();
  gen->add_option("--level", level, "DGM level");
  gen->add_option("--n", n, "BA vertex count / path edge count");
  gen->add_option("--m", m_attach, "BA edges per new vertex");
  gen->add_option("--leaves", leaves, "star leaves");
  gen->add_option("--seed", seed, "BA seed");
  gen->add_option("-o,--out", gen_out, "output file (default: stdout)");

  // solve
  auto* solve = app.add_subcommand("solve", "Solve a problem configuration");
  SolveFlags sf;
  solve->add_option("config", sf.config, "problem JSON")->required()->check(CLI::ExistingFile);
  solve->add_flag("--direct", sf.direct, "sparse Cholesky instead of the Schur path");
  solve->add_option("--prec", sf.prec, "none | diag | poly | nn")->capture_default_str();
  solve->add_option("--solver", sf.solver, "bicgstab | pcg | richardson")->capture_default_str();
  solve->add_option("--tol", sf.tol, "relative residual tolerance")->capture_default_str();
  solve->add_option("--maxit", sf.maxit, "iteration limit")->capture_default_str();
  solve->add_option("--theta", sf.theta, "Richardson damping")->capture_default_str();
  solve->add_flag("--nn-unscaled", sf.nn_unscaled, "drop the multiplicity scaling in Neumann-Neumann");
  solve->add_option("-o,--out", sf.out, "solution CSV (dof,value)");
  solve->add_option("--report", sf.report, "report JSON");
  solve->add_option("--dump-matrix", sf.dump_matrix, "write the stiffness matrix (MatrixMarket)");
  solve->add_option("--dump-schur", sf.dump_schur, "prefix for dense S and g (MatrixMarket)");

  // bench
  auto* bench = app.add_subcommand("bench", "Iteration-count sweep over graphs, meshes, preconditioners");
  BenchSpec spec;
  std::string params = "5..7", levels = "6", precs = "none,diag,poly,nn", bench_solver = "bicgstab", bench_out;
  std::string bench_config;
  bench->add_option("--family", spec.family, "dgm | ba")->capture_default_str();
  bench->add_option("--params", params, "levels (dgm) or sizes (ba): 5..9 or 100,500")->capture_default_str();
  bench->add_option("--levels", levels, "log2(1/h) list")->capture_default_str();
  bench->add_option("--prec", precs, "comma-separated preconditioners")->capture_default_str();
  bench->add_option("--solver", bench_solver, "bicgstab | pcg | richardson")->capture_default_str();
  bench->add_option("--seed", spec.seed, "BA seed")->capture_default_str();
  bench->add_option("--m", spec.ba_m, "BA edges per new vertex")->capture_default_str();
  bench->add_option("--c", spec.c, "coefficient c")->capture_default_str();
  bench->add_option("--p", spec.p, "coefficient p")->capture_default_str();
  bench->add_option("--f", spec.f, "load f")->capture_default_str();
  bench->add_flag("--random-load", spec.random_load, "seeded random nodal load instead of f");
  bench->add_option("--tol", spec.rule.tolerance, "relative residual tolerance");
  bench->add_option("--maxit", spec.rule.max_iterations, "iteration limit");
  bench->add_option("--theta", spec.theta, "Richardson damping");
  bench->add_flag("--cond", spec.with_cond, "append condition estimates of the preconditioned operator");
  bench->add_option("--config", bench_config, "JSON bench spec (keys mirror the flags)");
  bench->add_option("-o,--out", bench_out, "CSV output (default: stdout)");

  // convergence
  auto* conv = app.add_subcommand("convergence", "FEM error and observed order over mesh levels");
  std::string conv_config, conv_levels = "3..8", conv_out;
  conv->add_option("config", conv_config, "problem JSON with \"exact\"")->required()->check(CLI::ExistingFile);
  conv->add_option("--levels", conv_levels, "log2(1/h) list")->capture_default_str();
  conv->add_option("-o,--out", conv_out, "CSV output (default: stdout)");

  // cond
  auto* cond = app.add_subcommand("cond", "Extreme eigenvalues of the (preconditioned) Schur complement");
  std::string cond_config, cond_levels = "4,6,8,10", cond_prec = "none", cond_out;
  cond->add_option("config", cond_config, "problem JSON")->required()->check(CLI::ExistingFile);
  cond->add_option("--levels", cond_levels, "log2(1/h) list")->capture_default_str();
  cond->add_option("--prec", cond_prec, "none | diag | poly | nn")->capture_default_str();
  cond->add_option("-o,--out", cond_out, "CSV output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  auto emit = [](const std::string& path, auto&& write) {
    if (path.empty()) {
      write(std::cout);
    } else {
      std::ofstream out(path);
      if (!out) throw ConfigError("cannot write " + path);
      write(out);
    }
  };

  try {
    if (*gen) {
      MetricGraph g;
      if (family == "dgm") g = dgm(level);
      else if (family == "ba") g = barabasi_albert(n, m_attach, seed);
      else if (family == "star") g = star(leaves);
      else if (family == "path") g = path(n);
      else throw ConfigError("unknown family '" + family + "'");
      if (gen_out.empty()) {
        std::cout << graph_to_json(g).dump(2) << '\n';
      } else {
        write_graph(gen_out, g);
      }
      std::cerr << "n=" << g.num_vertices() << " m=" << g.num_edges() << '\n';
      return 0;
    }
    if (*solve) return cmd_solve(sf);
    if (*bench) {
      if (!bench_config.empty()) {
        std::ifstream in(bench_config);
        if (!in) throw ConfigError("cannot open " + bench_config);
        const json j = json::parse(in);
        spec.family = j.value("family", spec.family);
        if (j.contains("params")) spec.params = j.at("params").get<std::vector<int>>();
        if (j.contains("levels")) spec.log2_levels = j.at("levels").get<std::vector<int>>();
        if (j.contains("prec"))
          for (const auto& s : j.at("prec").get<std::vector<std::string>>()) spec.precs.push_back(parse_prec_kind(s));
        bench_solver = j.value("solver", bench_solver);
        spec.c = j.value("c", spec.c);
        spec.p = j.value("p", spec.p);
        spec.f = j.value("f", spec.f);
        spec.seed = j.value("seed", spec.seed);
        spec.ba_m = j.value("m", spec.ba_m);
        spec.with_cond = j.value("cond", spec.with_cond);
        spec.random_load = j.value("random_load", spec.random_load);
      } else {
        spec.params = parse_int_list(params);
        spec.log2_levels = parse_int_list(levels);
        for (const auto& s : split(precs)) spec.precs.push_back(parse_prec_kind(s));
      }
      spec.solver = parse_solver_kind(bench_solver);
      const auto rows = run_bench(spec);
      emit(bench_out, [&](std::ostream& o) { write_bench_csv(o, spec, rows); });
      if (!bench_out.empty()) print_bench_table(std::cout, spec, rows);
      for (const auto& r : rows)
        if (!r.converged) return kExitNumerical;
      return 0;
    }
    if (*conv) {
      const ProblemConfig cfg = read_problem_config(conv_config);
      const auto study = run_convergence(cfg, parse_int_list(conv_levels));
      emit(conv_out, [&](std::ostream& o) { write_convergence_csv(o, study); });
      return 0;
    }
    if (*cond) {
      const ProblemConfig cfg = read_problem_config(cond_config);
      const PrecKind prec = parse_prec_kind(cond_prec);
      const auto rows = run_cond(cfg, parse_int_list(cond_levels), prec);
      emit(cond_out, [&](std::ostream& o) { write_cond_csv(o, prec, rows); });
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const GraphError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
