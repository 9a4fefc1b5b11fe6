#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qgdd/io.hpp"

using namespace qgdd;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "qgdd_test_io";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("graph json round trip") {
  const MetricGraph g = barabasi_albert(30, 2, 4);
  const MetricGraph back = graph_from_json(graph_to_json(g));
  REQUIRE(back.num_edges() == g.num_edges());
  CHECK(back.num_vertices() == g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e) {
    CHECK(back.edge(e).origin == g.edge(e).origin);
    CHECK(back.edge(e).terminal == g.edge(e).terminal);
    CHECK(back.edge(e).length == g.edge(e).length);
  }
  CHECK(back.meta() == g.meta());

  const auto file = scratch_dir() / "g.json";
  write_graph(file, g);
  CHECK(read_graph(file).num_edges() == g.num_edges());
}

TEST_CASE("graph json errors") {
  CHECK_THROWS_AS(graph_from_json(json::parse(R"({"edges": []})")), ConfigError);
  CHECK_THROWS_AS(graph_from_json(json::parse(R"({"vertices": 2, "edges": [{"from": 0}]})")), ConfigError);
  CHECK_THROWS_AS(graph_from_json(json::parse(R"({"vertices": 2, "edges": [{"from": 0, "to": 0}]})")), GraphError);
  CHECK_THROWS_AS(read_graph(scratch_dir() / "missing.json"), ConfigError);
  const MetricGraph g = graph_from_json(json::parse(R"({"vertices": 2, "edges": [{"from": 0, "to": 1}]})"));
  CHECK(g.edge(0).length == 1.0);
}

TEST_CASE("generators in configs") {
  CHECK(graph_from_generator(json::parse(R"({"generator": "dgm", "level": 2})")).num_edges() == 9);
  CHECK(graph_from_generator(json::parse(R"({"generator": "ba", "n": 20, "m": 2, "seed": 3})")).num_edges() == 36);
  CHECK(graph_from_generator(json::parse(R"({"generator": "star", "leaves": 4})")).num_edges() == 4);
  CHECK(graph_from_generator(json::parse(R"({"generator": "path", "edges": 3, "length": 2})")).edge(0).length == 2.0);
  CHECK_THROWS_AS(graph_from_generator(json::parse(R"({"generator": "grid"})")), ConfigError);
}

TEST_CASE("per edge expressions") {
  const auto all = per_edge_exprs(json("x"), 3, "f");
  REQUIRE(all.size() == 3);
  CHECK(all[2](0.5) == 0.5);

  const auto mixed = per_edge_exprs(json::parse(R"({"default": "1", "1": "2*x"})"), 3, "c");
  CHECK(mixed[0](0.25) == 1.0);
  CHECK(mixed[1](0.25) == 0.5);
  CHECK(mixed[2](0.25) == 1.0);

  CHECK_THROWS_AS(per_edge_exprs(json::parse(R"({"0": "1"})"), 2, "p"), ConfigError);
  CHECK_THROWS_AS(per_edge_exprs(json::parse(R"({"default": "1", "5": "1"})"), 2, "p"), ConfigError);
  CHECK_THROWS_AS(per_edge_exprs(json::parse(R"({"default": "1", "a": "1"})"), 2, "p"), ConfigError);
  CHECK_THROWS_AS(per_edge_exprs(json("2*+x"), 2, "p"), ConfigError);
  CHECK_THROWS_AS(per_edge_exprs(json(3), 2, "p"), ConfigError);
}

TEST_CASE("problem config") {
  const json j = json::parse(R"({
    "graph": {"generator": "star", "leaves": 3},
    "log2_inv_h": 4,
    "p": "2",
    "f": {"default": "2", "0": "2 + 0*x"},
    "exact": "1"
  })");
  const ProblemConfig cfg = problem_config_from_json(j);
  CHECK(cfg.graph.num_edges() == 3);
  CHECK(cfg.target_h == 1.0 / 16);
  CHECK(cfg.c[0](0.3) == 1.0);
  CHECK(cfg.p[1](0.3) == 2.0);
  CHECK(cfg.exact.has_value());
  CHECK_FALSE(cfg.exact_dx.has_value());
  const Problem prob = make_problem(cfg);
  CHECK(prob.mesh.intervals[0] == 16);
  CHECK(make_problem(cfg, 0.5).mesh.intervals[0] == 2);

  CHECK(problem_config_from_json(json::parse(R"({"graph": {"generator": "dgm", "level": 1}})")).target_h == 1.0 / 64);
  CHECK_THROWS_AS(problem_config_from_json(json::parse(R"({"p": "1"})")), ConfigError);
  CHECK_THROWS_AS(problem_config_from_json(json::parse(R"({"graph": {"generator": "dgm", "level": 1}, "target_h": -1})")),
                  ConfigError);
}

TEST_CASE("problem config file with relative graph path") {
  const auto dir = scratch_dir();
  write_graph(dir / "tri.json", dgm(1));
  {
    std::ofstream out(dir / "problem.json");
    out << R"({"graph": "tri.json", "target_h": 0.25, "f": "x"})";
  }
  const ProblemConfig cfg = read_problem_config(dir / "problem.json");
  CHECK(cfg.graph.num_edges() == 3);
  CHECK(cfg.target_h == 0.25);
  {
    std::ofstream out(dir / "broken.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(read_problem_config(dir / "broken.json"), ConfigError);
  CHECK_THROWS_AS(read_problem_config(dir / "absent.json"), ConfigError);
}

TEST_CASE("solve report json") {
  SolveReport r;
  r.solver = "bicgstab";
  r.iterations = 2;
  r.residual_history = {1.0, 0.1, 1e-9};
  r.converged = true;
  r.status = SolveStatus::Converged;
  const json j = report_to_json(r);
  CHECK(j["iterations"] == 2);
  CHECK(j["status"] == "converged");
  CHECK(j["final_residual"] == 1e-9);
  CHECK(j["residual_history"].size() == 3);
}
