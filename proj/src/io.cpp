#include "qgdd/io.hpp"

#include <cmath>
#include <fstream>

namespace qgdd {

using nlohmann::json;

json graph_to_json(const MetricGraph& g) {
  json j;
  j["vertices"] = g.num_vertices();
  j["edges"] = json::array();
  for (const Edge& e : g.edges()) j["edges"].push_back({{"from", e.origin}, {"to", e.terminal}, {"length", e.length}});
  if (!g.meta().empty()) j["meta"] = g.meta();
  return j;
}

MetricGraph graph_from_json(const json& j) {
  try {
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges"))
      edges.push_back({e.at("from").get<int>(), e.at("to").get<int>(), e.value("length", 1.0)});
    std::map<std::string, std::string> meta;
    if (j.contains("meta"))
      for (const auto& [k, v] : j.at("meta").items()) meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return build_graph(j.at("vertices").get<int>(), std::move(edges), std::move(meta));
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed graph JSON: ") + ex.what());
  }
}

MetricGraph read_graph(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open graph file " + file.string());
  try {
    return graph_from_json(json::parse(in));
  } catch (const json::parse_error& ex) {
    throw ConfigError("cannot parse " + file.string() + ": " + ex.what());
  }
}

void write_graph(const std::filesystem::path& file, const MetricGraph& g) {
  std::ofstream out(file);
  if (!out) throw ConfigError("cannot write graph file " + file.string());
  out << graph_to_json(g).dump(2) << '\n';
}

MetricGraph graph_from_generator(const json& j) {
  const std::string gen = j.at("generator").get<std::string>();
  if (gen == "dgm") return dgm(j.at("level").get<int>());
  if (gen == "ba") return barabasi_albert(j.at("n").get<int>(), j.value("m", 2), j.value("seed", 1ULL));
  if (gen == "star") return star(j.at("leaves").get<int>(), j.value("length", 1.0));
  if (gen == "path") return path(j.at("edges").get<int>(), j.value("length", 1.0));
  throw ConfigError("unknown graph generator '" + gen + "'");
}

std::vector<Expr> per_edge_exprs(const json& value, int num_edges, const std::string& field) {
  auto parse = [&](const json& s) {
    if (!s.is_string()) throw ConfigError("field '" + field + "' must hold expression strings");
    try {
      return parse_expr(s.get<std::string>());
    } catch (const ExprSyntaxError& ex) {
      throw ConfigError("field '" + field + "': " + ex.what());
    }
  };
  if (value.is_string()) return std::vector<Expr>(static_cast<size_t>(num_edges), parse(value));
  if (!value.is_object()) throw ConfigError("field '" + field + "' must be a string or an object");
  std::vector<std::optional<Expr>> slots(static_cast<size_t>(num_edges));
  if (value.contains("default"))
    for (auto& s : slots) s = parse(value.at("default"));
  for (const auto& [key, v] : value.items()) {
    if (key == "default") continue;
    int e = -1;
    try {
      size_t used = 0;
      e = std::stoi(key, &used);
      if (used != key.size()) e = -1;
    } catch (const std::exception&) {
    }
    if (e < 0 || e >= num_edges) throw ConfigError("field '" + field + "': invalid edge id '" + key + "'");
    slots[static_cast<size_t>(e)] = parse(v);
  }
  std::vector<Expr> out;
  for (size_t e = 0; e < slots.size(); ++e) {
    if (!slots[e]) throw ConfigError("field '" + field + "': no expression for edge " + std::to_string(e));
    out.push_back(*slots[e]);
  }
  return out;
}

ProblemConfig problem_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ProblemConfig cfg;
  try {
    const json& g = j.at("graph");
    if (g.is_string()) {
      std::filesystem::path file = g.get<std::string>();
      if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
      cfg.graph = read_graph(file);
    } else if (g.contains("generator")) {
      cfg.graph = graph_from_generator(g);
    } else {
      cfg.graph = graph_from_json(g);
    }
    if (j.contains("target_h")) cfg.target_h = j.at("target_h").get<double>();
    if (j.contains("log2_inv_h")) cfg.target_h = std::ldexp(1.0, -j.at("log2_inv_h").get<int>());
    if (!(cfg.target_h > 0.0)) throw ConfigError("target_h must be positive");
    const int m = cfg.graph.num_edges();
    cfg.c = per_edge_exprs(j.value("c", json("1")), m, "c");
    cfg.p = per_edge_exprs(j.value("p", json("1")), m, "p");
    cfg.f = per_edge_exprs(j.value("f", json("1")), m, "f");
    if (j.contains("exact")) cfg.exact = per_edge_exprs(j.at("exact"), m, "exact");
    if (j.contains("exact_dx")) cfg.exact_dx = per_edge_exprs(j.at("exact_dx"), m, "exact_dx");
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed problem config: ") + ex.what());
  }
  return cfg;
}

ProblemConfig read_problem_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ConfigError("cannot parse " + file.string() + ": " + ex.what());
  }
  return problem_config_from_json(j, file.parent_path());
}

Problem make_problem(const ProblemConfig& config) { return make_problem(config, config.target_h); }

Problem make_problem(const ProblemConfig& config, double target_h) {
  return Problem(config.graph, build_mesh(config.graph, target_h), config.c, config.p, config.f);
}

json report_to_json(const SolveReport& report) {
  return {{"solver", report.solver},
          {"iterations", report.iterations},
          {"converged", report.converged},
          {"status", to_string(report.status)},
          {"message", report.message},
          {"final_residual", report.final_residual()},
          {"residual_history", report.residual_history},
          {"wall_time", report.wall_time},
          {"matvecs", report.matvecs},
          {"precond_applies", report.precond_applies},
          {"restarts", report.restarts}};
}

}  // namespace qgdd
