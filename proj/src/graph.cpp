#include "qgdd/graph.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <utility>

namespace qgdd {

namespace {

// Union-find over vertex ids; used for both graph and subgraph connectivity.
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int v) {
    while (parent_[static_cast<size_t>(v)] != v) {
      parent_[static_cast<size_t>(v)] = parent_[static_cast<size_t>(parent_[static_cast<size_t>(v)])];
      v = parent_[static_cast<size_t>(v)];
    }
    return v;
  }
  void unite(int a, int b) { parent_[static_cast<size_t>(find(a))] = find(b); }

 private:
  std::vector<int> parent_;
};

}  // namespace

int MetricGraph::max_degree() const noexcept {
  size_t best = 0;
  for (const auto& inc : incident_) best = std::max(best, inc.size());
  return static_cast<int>(best);
}

MetricGraph build_graph(int num_vertices, std::vector<Edge> edges, std::map<std::string, std::string> meta) {
  using K = GraphError::Kind;
  if (edges.empty()) throw GraphError(K::BadParameter, "graph needs at least one edge");

  std::set<std::pair<int, int>> seen;
  for (size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const std::string where = "edge " + std::to_string(i);
    if (e.origin < 0 || e.origin >= num_vertices || e.terminal < 0 || e.terminal >= num_vertices)
      throw GraphError(K::BadVertex, where + ": vertex id out of range");
    if (e.origin == e.terminal) throw GraphError(K::Loop, where + ": loop at vertex " + std::to_string(e.origin));
    if (!(e.length > 0.0)) throw GraphError(K::NonpositiveLength, where + ": length must be positive");
    auto key = std::minmax(e.origin, e.terminal);
    if (!seen.insert({key.first, key.second}).second)
      throw GraphError(K::DuplicateEdge, where + ": parallel edge between " + std::to_string(key.first) + " and " +
                                             std::to_string(key.second));
  }

  DisjointSets sets(num_vertices);
  for (const Edge& e : edges) sets.unite(e.origin, e.terminal);
  for (int v = 1; v < num_vertices; ++v)
    if (sets.find(v) != sets.find(0)) throw GraphError(K::Disconnected, "vertex " + std::to_string(v) + " is not connected to vertex 0");

  MetricGraph g;
  g.num_vertices_ = num_vertices;
  g.incident_.assign(static_cast<size_t>(num_vertices), {});
  for (size_t i = 0; i < edges.size(); ++i) {
    g.incident_[static_cast<size_t>(edges[i].origin)].push_back(static_cast<EdgeId>(i));
    g.incident_[static_cast<size_t>(edges[i].terminal)].push_back(static_cast<EdgeId>(i));
  }
  g.edges_ = std::move(edges);
  g.meta_ = std::move(meta);
  return g;
}

MetricGraph build_graph(std::vector<Edge> edges) {
  int n = 0;
  for (const Edge& e : edges) n = std::max({n, e.origin + 1, e.terminal + 1});
  return build_graph(n, std::move(edges));
}

MetricGraph dgm(int level) {
  if (level < 0) throw GraphError(GraphError::Kind::BadParameter, "dgm level must be nonnegative");
  std::vector<Edge> edges{{0, 1, 1.0}};
  int n = 2;
  for (int k = 0; k < level; ++k) {
    const size_t old = edges.size();
    edges.reserve(3 * old);
    for (size_t i = 0; i < old; ++i) {
      const Edge e = edges[i];
      const int w = n++;
      edges.push_back({e.origin, w, 1.0});
      edges.push_back({e.terminal, w, 1.0});
    }
  }
  return build_graph(n, std::move(edges), {{"generator", "dgm"}, {"level", std::to_string(level)}});
}

MetricGraph barabasi_albert(int n, int m_attach, std::uint64_t seed) {
  if (m_attach < 1 || n <= m_attach)
    throw GraphError(GraphError::Kind::BadParameter, "barabasi_albert requires n > m_attach >= 1");

  std::mt19937_64 engine(seed);
  std::vector<Edge> edges;
  std::vector<int> endpoints;  // each vertex appears once per incident edge
  for (int leaf = 1; leaf <= m_attach; ++leaf) {
    edges.push_back({0, leaf, 1.0});
    endpoints.push_back(0);
    endpoints.push_back(leaf);
  }
  std::vector<int> targets;
  for (int v = m_attach + 1; v < n; ++v) {
    targets.clear();
    while (static_cast<int>(targets.size()) < m_attach) {
      const int t = endpoints[static_cast<size_t>(engine() % endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) targets.push_back(t);
    }
    for (int t : targets) {
      edges.push_back({v, t, 1.0});
      endpoints.push_back(v);
      endpoints.push_back(t);
    }
  }
  return build_graph(n, std::move(edges),
                     {{"generator", "ba"}, {"n", std::to_string(n)}, {"m", std::to_string(m_attach)},
                      {"seed", std::to_string(seed)}});
}

MetricGraph star(int leaves, double length) {
  std::vector<Edge> edges;
  for (int i = 1; i <= leaves; ++i) edges.push_back({0, i, length});
  return build_graph(leaves + 1, std::move(edges), {{"generator", "star"}, {"leaves", std::to_string(leaves)}});
}

MetricGraph path(int num_edges, double length) {
  std::vector<Edge> edges;
  for (int i = 0; i < num_edges; ++i) edges.push_back({i, i + 1, length});
  return build_graph(num_edges + 1, std::move(edges), {{"generator", "path"}, {"edges", std::to_string(num_edges)}});
}

// --- partitions -------------------------------------------------------------

int Partition::interface_index(VertexId v) const {
  if (v < 0 || static_cast<size_t>(v) >= interface_position.size()) return -1;
  return interface_position[static_cast<size_t>(v)];
}

std::vector<VertexId> subgraph_vertices(const MetricGraph& g, const Partition& p, int i) {
  std::vector<VertexId> vs;
  for (EdgeId e : p.subgraphs.at(static_cast<size_t>(i))) {
    vs.push_back(g.edge(e).origin);
    vs.push_back(g.edge(e).terminal);
  }
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  return vs;
}

Partition make_partition(const MetricGraph& g, std::vector<std::vector<EdgeId>> subgraphs) {
  using K = PartitionError::Kind;
  Partition p;
  p.subgraph_of_edge.assign(static_cast<size_t>(g.num_edges()), -1);
  p.multiplicity.assign(static_cast<size_t>(g.num_vertices()), 0);
  for (size_t i = 0; i < subgraphs.size(); ++i) {
    std::set<VertexId> touched;
    for (EdgeId e : subgraphs[i]) {
      if (e < 0 || e >= g.num_edges()) throw PartitionError(K::BadEdgeId, "edge id " + std::to_string(e) + " out of range");
      auto& owner = p.subgraph_of_edge[static_cast<size_t>(e)];
      if (owner != -1)
        throw PartitionError(K::DoublyAssignedEdge, "edge " + std::to_string(e) + " assigned to subgraphs " +
                                                         std::to_string(owner) + " and " + std::to_string(i));
      owner = static_cast<int>(i);
      touched.insert(g.edge(e).origin);
      touched.insert(g.edge(e).terminal);
    }
    for (VertexId v : touched) ++p.multiplicity[static_cast<size_t>(v)];
  }
  p.interface_position.assign(static_cast<size_t>(g.num_vertices()), -1);
  for (VertexId v = 0; v < g.num_vertices(); ++v) {
    if (p.multiplicity[static_cast<size_t>(v)] >= 2) {
      p.interface_position[static_cast<size_t>(v)] = static_cast<int>(p.interface.size());
      p.interface.push_back(v);
    }
  }
  p.subgraphs = std::move(subgraphs);
  validate_partition(g, p);
  return p;
}

Partition partition_by_edges(const MetricGraph& g) {
  std::vector<std::vector<EdgeId>> sets(static_cast<size_t>(g.num_edges()));
  for (EdgeId e = 0; e < g.num_edges(); ++e) sets[static_cast<size_t>(e)] = {e};
  return make_partition(g, std::move(sets));
}

void validate_partition(const MetricGraph& g, const Partition& p) {
  using K = PartitionError::Kind;
  std::vector<int> owner(static_cast<size_t>(g.num_edges()), -1);
  std::vector<int> mult(static_cast<size_t>(g.num_vertices()), 0);
  for (int i = 0; i < p.num_subgraphs(); ++i) {
    const auto& es = p.subgraphs[static_cast<size_t>(i)];
    for (EdgeId e : es) {
      if (e < 0 || e >= g.num_edges()) throw PartitionError(K::BadEdgeId, "edge id " + std::to_string(e) + " out of range");
      if (owner[static_cast<size_t>(e)] != -1)
        throw PartitionError(K::DoublyAssignedEdge, "edge " + std::to_string(e) + " assigned twice");
      owner[static_cast<size_t>(e)] = i;
    }
    const auto vs = subgraph_vertices(g, p, i);
    for (VertexId v : vs) ++mult[static_cast<size_t>(v)];

    if (es.empty()) throw PartitionError(K::DisconnectedSubgraph, "subgraph " + std::to_string(i) + " is empty");
    DisjointSets sets(g.num_vertices());
    for (EdgeId e : es) sets.unite(g.edge(e).origin, g.edge(e).terminal);
    for (VertexId v : vs)
      if (sets.find(v) != sets.find(vs.front()))
        throw PartitionError(K::DisconnectedSubgraph, "subgraph " + std::to_string(i) + " is not connected");
  }
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (owner[static_cast<size_t>(e)] == -1) throw PartitionError(K::UncoveredEdge, "edge " + std::to_string(e) + " is not covered");
  if (p.subgraph_of_edge != owner) throw PartitionError(K::DoublyAssignedEdge, "edge-to-subgraph map is inconsistent");

  std::vector<VertexId> iface;
  for (VertexId v = 0; v < g.num_vertices(); ++v)
    if (mult[static_cast<size_t>(v)] >= 2) iface.push_back(v);
  if (p.multiplicity != mult || p.interface != iface)
    throw PartitionError(K::WrongInterface, "interface or multiplicities do not match the subgraphs");
  if (p.interface_position.size() != static_cast<size_t>(g.num_vertices()))
    throw PartitionError(K::WrongInterface, "interface position map has wrong size");
  for (size_t k = 0; k < iface.size(); ++k)
    if (p.interface_position[static_cast<size_t>(iface[k])] != static_cast<int>(k))
      throw PartitionError(K::WrongInterface, "interface position map is inconsistent");
}

}  // namespace qgdd
