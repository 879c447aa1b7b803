#include "hsgraph/graph.hpp"

#include <algorithm>
#include <sstream>

#include "hsgraph/error.hpp"

namespace hsgraph {

std::string_view to_string(Directedness d) {
  return d == Directedness::directed ? "directed" : "undirected";
}

ServiceGraph ServiceGraph::from_parts(Directedness kind,
                                      std::vector<std::string> names,
                                      std::vector<Edge> edges) {
  if (!std::is_sorted(names.begin(), names.end()) ||
      std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw UsageError("vertex names must be sorted and unique");
  }
  const auto n = names.size();
  for (auto& e : edges) {
    if (e.source >= n || e.target >= n) throw UsageError("edge endpoint out of range");
    if (e.source == e.target) throw UsageError("self-loop on " + names[e.source]);
    if (e.weight == 0) throw UsageError("zero edge weight");
    if (kind == Directedness::undirected && e.source > e.target) {
      std::swap(e.source, e.target);
    }
  }
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].source == edges[i - 1].source &&
        edges[i].target == edges[i - 1].target) {
      throw UsageError("parallel edge " + names[edges[i].source] + " -> " +
                       names[edges[i].target]);
    }
  }

  ServiceGraph g;
  g.kind_ = kind;
  g.names_ = std::move(names);
  g.edges_ = std::move(edges);

  const bool directed = kind == Directedness::directed;
  std::vector<std::size_t> out_count(n, 0), in_count(n, 0);
  for (const auto& e : g.edges_) {
    ++out_count[e.source];
    if (directed) {
      ++in_count[e.target];
    } else {
      ++out_count[e.target];
    }
  }
  g.out_offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.out_offsets_[v + 1] = g.out_offsets_[v] + out_count[v];
  g.out_arcs_.resize(g.out_offsets_[n]);
  std::vector<std::size_t> cursor(g.out_offsets_.begin(), g.out_offsets_.end() - 1);
  for (const auto& e : g.edges_) {
    g.out_arcs_[cursor[e.source]++] = Arc{e.target, e.weight};
    if (!directed) g.out_arcs_[cursor[e.target]++] = Arc{e.source, e.weight};
  }
  if (directed) {
    g.in_offsets_.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) g.in_offsets_[v + 1] = g.in_offsets_[v] + in_count[v];
    g.in_arcs_.resize(g.in_offsets_[n]);
    cursor.assign(g.in_offsets_.begin(), g.in_offsets_.end() - 1);
    for (const auto& e : g.edges_) g.in_arcs_[cursor[e.target]++] = Arc{e.source, e.weight};
  }
  const auto by_vertex = [](const Arc& a, const Arc& b) { return a.vertex < b.vertex; };
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(g.out_arcs_.begin() + static_cast<std::ptrdiff_t>(g.out_offsets_[v]),
              g.out_arcs_.begin() + static_cast<std::ptrdiff_t>(g.out_offsets_[v + 1]), by_vertex);
    if (directed) {
      std::sort(g.in_arcs_.begin() + static_cast<std::ptrdiff_t>(g.in_offsets_[v]),
                g.in_arcs_.begin() + static_cast<std::ptrdiff_t>(g.in_offsets_[v + 1]), by_vertex);
    }
  }
  return g;
}

std::optional<VertexId> ServiceGraph::find(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) return std::nullopt;
  return static_cast<VertexId>(it - names_.begin());
}

std::optional<std::uint64_t> ServiceGraph::weight(VertexId u, VertexId v) const {
  const auto arcs = out(u);
  auto it = std::lower_bound(arcs.begin(), arcs.end(), v,
                             [](const Arc& a, VertexId x) { return a.vertex < x; });
  if (it == arcs.end() || it->vertex != v) return std::nullopt;
  return it->weight;
}

ServiceGraph ServiceGraph::induced(std::span<const VertexId> keep) const {
  std::vector<VertexId> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  constexpr auto absent = static_cast<VertexId>(-1);
  std::vector<VertexId> remap(vertex_count(), absent);
  std::vector<std::string> names;
  names.reserve(sorted.size());
  for (VertexId v : sorted) {
    remap[v] = static_cast<VertexId>(names.size());
    names.push_back(names_[v]);
  }
  std::vector<Edge> edges;
  for (const auto& e : edges_) {
    if (remap[e.source] != absent && remap[e.target] != absent) {
      edges.push_back({remap[e.source], remap[e.target], e.weight});
    }
  }
  return from_parts(kind_, std::move(names), std::move(edges));
}

void GraphBuilder::add_vertex(std::string name) {
  if (name.empty()) throw UsageError("empty vertex name");
  vertices_.insert(std::move(name));
}

void GraphBuilder::add_edge(std::string_view from, std::string_view to,
                            std::uint64_t weight) {
  if (from == to) throw UsageError("self-loop on " + std::string(from));
  if (weight == 0) throw UsageError("zero edge weight");
  if (from.empty() || to.empty()) throw UsageError("empty vertex name");
  if (kind_ == Directedness::undirected && to < from) std::swap(from, to);
  vertices_.emplace(from);
  vertices_.emplace(to);
  edges_[{std::string(from), std::string(to)}] += weight;
}

ServiceGraph GraphBuilder::build() const {
  std::vector<std::string> names(vertices_.begin(), vertices_.end());
  const auto index = [&](const std::string& s) {
    return static_cast<VertexId>(std::lower_bound(names.begin(), names.end(), s) -
                                 names.begin());
  };
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const auto& [key, w] : edges_) {
    edges.push_back({index(key.first), index(key.second), w});
  }
  return ServiceGraph::from_parts(kind_, std::move(names), std::move(edges));
}

std::string write_graph(const ServiceGraph& g) {
  std::ostringstream out;
  out << "# " << to_string(g.kind()) << '\n';
  for (const auto& name : g.names()) {
    if (name.find_first_of("\t\n\r") != std::string::npos) {
      throw DataError("vertex name contains a tab or newline: " + name);
    }
  }
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (g.out_degree(v) == 0 && g.in_degree(v) == 0) {
      out << "# vertex\t" << g.name(v) << '\n';
    }
  }
  for (const auto& e : g.edges()) {
    out << g.name(e.source) << '\t' << g.name(e.target) << '\t' << e.weight << '\n';
  }
  return out.str();
}

ServiceGraph read_graph(std::istream& in) {
  std::string text;
  std::size_t line = 0;
  std::optional<GraphBuilder> builder;
  std::set<std::pair<std::string, std::string>> seen;
  bool undirected_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    if (!builder) {
      if (text == "# directed") {
        builder.emplace(Directedness::directed);
      } else if (text == "# undirected") {
        builder.emplace(Directedness::undirected);
        undirected_header = true;
      } else {
        throw ParseError(line, "", "expected '# directed' or '# undirected' header");
      }
      continue;
    }
    if (text.rfind("# vertex\t", 0) == 0) {
      auto name = text.substr(9);
      if (name.empty()) throw ParseError(line, "", "empty vertex name");
      builder->add_vertex(std::move(name));
      continue;
    }
    if (text.front() == '#') continue;

    const auto t1 = text.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : text.find('\t', t1 + 1);
    if (t2 == std::string::npos || text.find('\t', t2 + 1) != std::string::npos) {
      throw ParseError(line, "", "expected source<TAB>target<TAB>weight");
    }
    std::string src = text.substr(0, t1);
    std::string dst = text.substr(t1 + 1, t2 - t1 - 1);
    std::uint64_t w = 0;
    try {
      std::size_t used = 0;
      const auto wtext = text.substr(t2 + 1);
      if (wtext.empty() || wtext.front() == '-') throw std::invalid_argument("neg");
      w = std::stoull(wtext, &used);
      if (used != wtext.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(line, "weight", "expected a positive integer");
    }
    if (w == 0) throw ParseError(line, "weight", "expected a positive integer");
    if (src.empty() || dst.empty()) throw ParseError(line, "", "empty vertex name");
    if (src == dst) throw ParseError(line, "", "self-loop");
    auto key = (undirected_header && dst < src) ? std::pair{dst, src} : std::pair{src, dst};
    if (!seen.insert(std::move(key)).second) {
      throw ParseError(line, "", "duplicate edge");
    }
    builder->add_edge(src, dst, w);
  }
  if (!builder) throw ParseError(line, "", "missing header");
  return builder->build();
}

}  // namespace hsgraph
