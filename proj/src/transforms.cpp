#include "hsgraph/transforms.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "hsgraph/error.hpp"

namespace hsgraph {

namespace {

bool is_base32(char c) { return (c >= 'a' && c <= 'z') || (c >= '2' && c <= '7'); }

void require_same_kind(std::span<const ServiceGraph> graphs) {
  for (const auto& g : graphs) {
    if (g.kind() != graphs.front().kind()) {
      throw UsageError("cannot combine directed and undirected graphs");
    }
  }
}

}  // namespace

bool OnionNamespace::contains(std::string_view id) const {
  constexpr std::string_view suffix = ".onion";
  if (id.size() <= suffix.size()) return false;
  std::string_view tail = id.substr(id.size() - suffix.size());
  for (std::size_t i = 0; i < suffix.size(); ++i) {
    const char c = tail[i];
    if ((c | 0x20) != suffix[i] && c != suffix[i]) return false;
  }
  const auto label = id.substr(0, id.size() - suffix.size());
  if (strict) {
    if (label.size() != 16 && label.size() != 56) return false;
    return std::all_of(label.begin(), label.end(), is_base32);
  }
  return std::all_of(label.begin(), label.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
           (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_';
  });
}

ServiceGraph build_dsg(std::span<const PageRecord> pages, const OnionNamespace& ns) {
  GraphBuilder builder(Directedness::directed);
  if (pages.empty()) return builder.build();

  std::set<std::string_view> crawled;
  for (const auto& p : pages) {
    if (p.snapshot != pages.front().snapshot) {
      throw UsageError("build_dsg: pages span snapshots '" + pages.front().snapshot +
                       "' and '" + p.snapshot + "'");
    }
    crawled.insert(p.service);
  }
  for (const auto& p : pages) {
    builder.add_vertex(p.service);
    for (const auto& target : p.links) {
      if (target == p.service) continue;
      if (!crawled.contains(target) && !ns.contains(target)) continue;
      builder.add_edge(p.service, target, 1);
    }
  }
  return builder.build();
}

ServiceGraph to_usg(const ServiceGraph& dsg) {
  if (!dsg.directed()) throw UsageError("to_usg expects a directed graph");
  GraphBuilder builder(Directedness::undirected);
  for (const auto& e : dsg.edges()) {
    if (e.source > e.target) continue;  // visit each pair once
    if (auto back = dsg.weight(e.target, e.source)) {
      builder.add_edge(dsg.name(e.source), dsg.name(e.target),
                       std::min(e.weight, *back));
    }
  }
  return builder.build();
}

ServiceGraph intersect(std::span<const ServiceGraph> graphs) {
  if (graphs.size() < 2) throw UsageError("intersect needs at least two graphs");
  require_same_kind(graphs);

  GraphBuilder builder(graphs.front().kind());
  const auto& base = graphs.front();
  for (const auto& e : base.edges()) {
    const auto& u = base.name(e.source);
    const auto& v = base.name(e.target);
    std::uint64_t w = e.weight;
    bool everywhere = true;
    for (const auto& other : graphs.subspan(1)) {
      const auto ou = other.find(u);
      const auto ov = ou ? other.find(v) : std::nullopt;
      const auto ow = ov ? other.weight(*ou, *ov) : std::nullopt;
      if (!ow) {
        everywhere = false;
        break;
      }
      w = std::min(w, *ow);
    }
    if (everywhere) builder.add_edge(u, v, w);
  }
  return builder.build();
}

ServiceGraph unite(std::span<const ServiceGraph> graphs) {
  if (graphs.empty()) throw UsageError("union needs at least one graph");
  require_same_kind(graphs);
  if (graphs.size() == 1) return graphs.front();

  std::map<std::pair<std::string_view, std::string_view>, std::uint64_t> merged;
  for (const auto& g : graphs) {
    for (const auto& e : g.edges()) {
      auto& w = merged[{g.name(e.source), g.name(e.target)}];
      w = std::max(w, e.weight);
    }
  }
  GraphBuilder builder(graphs.front().kind());
  for (const auto& [key, w] : merged) builder.add_edge(key.first, key.second, w);
  return builder.build();
}

std::vector<std::uint32_t> weak_components(const ServiceGraph& g) {
  const auto n = g.vertex_count();
  std::vector<VertexId> parent(n);
  std::iota(parent.begin(), parent.end(), VertexId{0});
  const auto root = [&](VertexId v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& e : g.edges()) {
    auto a = root(e.source);
    auto b = root(e.target);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  constexpr auto unset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> label_of_root(n, unset);
  std::vector<std::uint32_t> labels(n);
  std::uint32_t next = 0;
  for (VertexId v = 0; v < n; ++v) {
    auto r = root(v);
    if (label_of_root[r] == unset) label_of_root[r] = next++;
    labels[v] = label_of_root[r];
  }
  return labels;
}

ServiceGraph giant_wcc(const ServiceGraph& g) {
  if (g.empty()) throw DataError("empty graph has no giant component");
  const auto labels = weak_components(g);
  std::vector<std::size_t> sizes(*std::max_element(labels.begin(), labels.end()) + 1, 0);
  for (auto l : labels) ++sizes[l];
  // max_element keeps the first maximum, i.e. the smallest-vertex component.
  const auto best = static_cast<std::uint32_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  if (sizes[best] == g.vertex_count()) return g;
  std::vector<VertexId> keep;
  keep.reserve(sizes[best]);
  for (VertexId v = 0; v < g.vertex_count(); ++v) {
    if (labels[v] == best) keep.push_back(v);
  }
  return g.induced(keep);
}

}  // namespace hsgraph
