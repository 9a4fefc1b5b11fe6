#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qgdd {

using VertexId = int;
using EdgeId = int;

struct Edge {
  VertexId origin = 0;
  VertexId terminal = 0;
  double length = 1.0;
};

class GraphError : public std::runtime_error {
 public:
  enum class Kind { Loop, DuplicateEdge, NonpositiveLength, Disconnected, BadVertex, BadParameter };

  GraphError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Directed simple metric graph. Each edge e is the interval [0, length_e],
/// with x = 0 at the origin vertex and x = length_e at the terminal vertex.
///
/// Instances are immutable and always satisfy: no loops, no parallel edges
/// (in either orientation), positive lengths, connected.
class MetricGraph {
 public:
  MetricGraph() = default;

  int num_vertices() const noexcept { return num_vertices_; }
  int num_edges() const noexcept { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(static_cast<size_t>(e)); }
  int degree(VertexId v) const { return static_cast<int>(incident_.at(static_cast<size_t>(v)).size()); }
  int max_degree() const noexcept;
  /// Edges incident to v, in ascending edge id order.
  const std::vector<EdgeId>& incident(VertexId v) const { return incident_.at(static_cast<size_t>(v)); }

  /// Free-form provenance (generator name, parameters); carried through JSON.
  const std::map<std::string, std::string>& meta() const noexcept { return meta_; }

  friend MetricGraph build_graph(int, std::vector<Edge>, std::map<std::string, std::string>);

 private:
  int num_vertices_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> incident_;
  std::map<std::string, std::string> meta_;
};

/// Validates and builds a graph on vertices 0..num_vertices-1.
/// Throws GraphError with a distinct Kind per violation.
MetricGraph build_graph(int num_vertices, std::vector<Edge> edges,
                        std::map<std::string, std::string> meta = {});

/// Infers the vertex count as 1 + the largest id referenced.
MetricGraph build_graph(std::vector<Edge> edges);

/// Dorogovtsev-Goltsev-Mendes graph. DGM(0) is a single edge; DGM(k+1) adds, for every
/// edge (a, b) of DGM(k), a new vertex w and the edges (a, w), (b, w). Unit lengths.
MetricGraph dgm(int level);

/// Barabasi-Albert preferential attachment graph with unit lengths.
///
/// Seed graph: star with center 0 and leaves 1..m_attach. Each new vertex v picks m_attach
/// distinct targets; a target is drawn uniformly from the list of edge endpoints (so with
/// probability proportional to degree) and redrawn while it repeats an earlier pick.
/// Randomness: std::mt19937_64 seeded with `seed`, index drawn as `engine() % list_size`.
MetricGraph barabasi_albert(int n, int m_attach, std::uint64_t seed);

/// Star with `leaves` unit edges oriented from center 0 to leaf i.
MetricGraph star(int leaves, double length = 1.0);

/// Path 0 - 1 - ... - edges, unit lengths.
MetricGraph path(int edges, double length = 1.0);

// --- partitions -------------------------------------------------------------

/// Edge-disjoint decomposition into subgraphs and the induced interface.
/// Subgraph ids are 0-based; `interface` is sorted ascending.
struct Partition {
  std::vector<std::vector<EdgeId>> subgraphs;
  std::vector<int> subgraph_of_edge;  // -1 if unassigned
  std::vector<VertexId> interface;
  std::vector<int> multiplicity;  // per vertex: number of subgraphs touching it

  int num_subgraphs() const noexcept { return static_cast<int>(subgraphs.size()); }
  /// Position of v inside `interface`, or -1.
  int interface_index(VertexId v) const;
  std::vector<int> interface_position;  // per vertex, -1 if not on the interface
};

class PartitionError : public std::runtime_error {
 public:
  enum class Kind { UncoveredEdge, DoublyAssignedEdge, DisconnectedSubgraph, WrongInterface, BadEdgeId };

  PartitionError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Derives the edge map, multiplicities and interface from explicit edge sets and validates.
Partition make_partition(const MetricGraph& g, std::vector<std::vector<EdgeId>> subgraphs);

/// One subgraph per edge. Interface = vertices of degree >= 2.
Partition partition_by_edges(const MetricGraph& g);

/// Throws PartitionError if `p` is not a consistent edge-disjoint cover of `g`
/// with connected subgraphs and an interface matching the multiplicities.
void validate_partition(const MetricGraph& g, const Partition& p);

/// Vertices touched by the edges of subgraph i, ascending.
std::vector<VertexId> subgraph_vertices(const MetricGraph& g, const Partition& p, int i);

}  // namespace qgdd
