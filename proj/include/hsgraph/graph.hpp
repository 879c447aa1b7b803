#pragma once

#include <compare>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hsgraph {

enum class Directedness : std::uint8_t { directed, undirected };

std::string_view to_string(Directedness d);

using VertexId = std::uint32_t;

/// Weighted edge between vertex indices. Undirected edges are stored with
/// source < target.
struct Edge {
  VertexId source;
  VertexId target;
  std::uint64_t weight;
  auto operator<=>(const Edge&) const = default;
};

/// Adjacency entry: the vertex at the other end and the edge weight.
struct Arc {
  VertexId vertex;
  std::uint64_t weight;
};

/// Immutable weighted service graph.
///
/// Vertices are service ids kept in lexicographic order, so VertexId order
/// equals name order. No self-loops and no parallel edges; multiplicity
/// lives in the weight (always >= 1). Adjacency lists are sorted by
/// neighbour id. For undirected graphs out() and in() both return the
/// neighbour list.
class ServiceGraph {
 public:
  ServiceGraph() = default;

  /// Assembles a graph from sorted unique names and edges over their
  /// indices. Edges may come in any order; parallel edges, self-loops and
  /// zero weights are rejected with UsageError.
  static ServiceGraph from_parts(Directedness kind,
                                 std::vector<std::string> names,
                                 std::vector<Edge> edges);

  Directedness kind() const noexcept { return kind_; }
  bool directed() const noexcept { return kind_ == Directedness::directed; }
  bool empty() const noexcept { return names_.empty(); }

  std::size_t vertex_count() const noexcept { return names_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::span<const std::string> names() const noexcept { return names_; }
  const std::string& name(VertexId v) const { return names_[v]; }
  std::optional<VertexId> find(std::string_view name) const;

  std::span<const Edge> edges() const noexcept { return edges_; }

  std::span<const Arc> out(VertexId v) const {
    return {out_arcs_.data() + out_offsets_[v],
            out_arcs_.data() + out_offsets_[v + 1]};
  }
  std::span<const Arc> in(VertexId v) const {
    if (!directed()) return out(v);
    return {in_arcs_.data() + in_offsets_[v],
            in_arcs_.data() + in_offsets_[v + 1]};
  }

  std::size_t out_degree(VertexId v) const { return out(v).size(); }
  std::size_t in_degree(VertexId v) const { return in(v).size(); }
  /// in + out for directed graphs, neighbour count for undirected ones.
  std::size_t degree(VertexId v) const {
    return directed() ? out_degree(v) + in_degree(v) : out_degree(v);
  }

  /// Weight of u->v (or {u,v}), if the edge exists.
  std::optional<std::uint64_t> weight(VertexId u, VertexId v) const;
  bool has_edge(VertexId u, VertexId v) const { return weight(u, v).has_value(); }

  /// Subgraph on `keep` (any order) with every edge between kept vertices.
  ServiceGraph induced(std::span<const VertexId> keep) const;

  bool operator==(const ServiceGraph& other) const {
    return kind_ == other.kind_ && names_ == other.names_ &&
           edges_ == other.edges_;
  }

 private:
  Directedness kind_ = Directedness::directed;
  std::vector<std::string> names_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<Arc> out_arcs_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<Arc> in_arcs_;
};

/// Accumulates named vertices and edges; repeated edges add their weights.
class GraphBuilder {
 public:
  explicit GraphBuilder(Directedness kind) : kind_(kind) {}

  void add_vertex(std::string name);
  /// Self-loops and zero weights throw UsageError.
  void add_edge(std::string_view from, std::string_view to,
                std::uint64_t weight = 1);

  ServiceGraph build() const;

 private:
  Directedness kind_;
  std::set<std::string, std::less<>> vertices_;
  std::map<std::pair<std::string, std::string>, std::uint64_t> edges_;
};

/// Text form:
///   # directed|undirected
///   source<TAB>target<TAB>weight
///   # vertex<TAB>name        (isolated vertices only)
std::string write_graph(const ServiceGraph& g);
ServiceGraph read_graph(std::istream& in);

}  // namespace hsgraph
