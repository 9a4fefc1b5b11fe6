#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgdd/expr.hpp"
#include "qgdd/fem.hpp"
#include "qgdd/graph.hpp"
#include "qgdd/krylov.hpp"

namespace qgdd {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Graph files: {"vertices": n, "edges": [{"from": i, "to": j, "length": x}, ...], "meta": {...}}
nlohmann::json graph_to_json(const MetricGraph& g);
MetricGraph graph_from_json(const nlohmann::json& j);
MetricGraph read_graph(const std::filesystem::path& file);
void write_graph(const std::filesystem::path& file, const MetricGraph& g);

/// Parsed problem configuration.
///
///   {
///     "graph": "file.json" | {graph object} | {"generator": "dgm", "level": 3},
///     "target_h": 0.015625,          // or "log2_inv_h": 6
///     "c": "1", "p": "1", "f": "(pi^2+1)*cos(pi*x)",
///     "exact": "cos(pi*x)",          // optional, enables error norms
///     "exact_dx": "-pi*sin(pi*x)"    // optional derivative of "exact"
///   }
///
/// Each expression field is either a string (every edge) or an object whose keys are
/// edge ids plus an optional "default"; an edge id entry overrides the default.
struct ProblemConfig {
  MetricGraph graph;
  double target_h = 1.0 / 64.0;
  std::vector<Expr> c, p, f;
  std::optional<std::vector<Expr>> exact;
  std::optional<std::vector<Expr>> exact_dx;
};

/// `base_dir` resolves relative graph file names.
ProblemConfig problem_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ProblemConfig read_problem_config(const std::filesystem::path& file);

/// Builds a graph from a generator description {"generator": "dgm"|"ba"|"star"|"path", ...}.
MetricGraph graph_from_generator(const nlohmann::json& j);

/// Per-edge expressions from a string or {"default": ..., "<edge id>": ...} object.
std::vector<Expr> per_edge_exprs(const nlohmann::json& value, int num_edges, const std::string& field);

Problem make_problem(const ProblemConfig& config);
Problem make_problem(const ProblemConfig& config, double target_h);

nlohmann::json report_to_json(const SolveReport& report);

}  // namespace qgdd
