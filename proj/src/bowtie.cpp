#include "hsgraph/bowtie.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "hsgraph/error.hpp"

namespace hsgraph {

namespace {

constexpr std::uint32_t kUnset = UINT32_MAX;

enum class Direction { forward, backward };

/// Marks every vertex reachable from `seeds` (seeds included).
std::vector<char> sweep(const ServiceGraph& g, const std::vector<VertexId>& seeds, Direction dir) {
  std::vector<char> seen(g.vertex_count(), 0);
  std::vector<VertexId> stack;
  for (auto s : seeds) {
    if (!seen[s]) {
      seen[s] = 1;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (const auto& a : dir == Direction::forward ? g.out(v) : g.in(v)) {
      if (!seen[a.vertex]) {
        seen[a.vertex] = 1;
        stack.push_back(a.vertex);
      }
    }
  }
  return seen;
}

}  // namespace

std::string_view to_string(BowTieClass c) {
  switch (c) {
    case BowTieClass::lscc: return "LSCC";
    case BowTieClass::in: return "IN";
    case BowTieClass::out: return "OUT";
    case BowTieClass::tubes: return "TUBES";
    case BowTieClass::tendrils: return "TENDRILS";
    case BowTieClass::disconnected: return "DISCONNECTED";
  }
  return "?";
}

double BowTie::fraction(BowTieClass c) const {
  return classes.empty() ? 0.0 : static_cast<double>(count(c)) / static_cast<double>(classes.size());
}

std::vector<std::uint32_t> strong_components(const ServiceGraph& g) {
  const auto n = static_cast<VertexId>(g.vertex_count());
  std::vector<std::uint32_t> index(n, kUnset), low(n, 0), comp(n, kUnset);
  std::vector<char> on_stack(n, 0);
  std::vector<VertexId> stack;
  struct Frame {
    VertexId v;
    std::size_t next;
  };
  std::vector<Frame> call;
  std::uint32_t counter = 0, comps = 0;

  for (VertexId root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& f = call.back();
      const auto arcs = g.out(f.v);
      if (f.next < arcs.size()) {
        const auto w = arcs[f.next++].vertex;
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
        continue;
      }
      const auto v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == index[v]) {
        VertexId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = comps;
        } while (w != v);
        ++comps;
      }
    }
  }
  return comp;
}

BowTie bowtie_decompose(const ServiceGraph& g) {
  if (!g.directed()) throw UsageError("bow-tie decomposition needs a directed graph");
  if (g.empty()) throw DataError("bow-tie decomposition of an empty graph");
  const auto n = g.vertex_count();
  const auto comp = strong_components(g);

  // Size per component and its smallest member (vertices are name-ordered).
  const std::size_t k = *std::max_element(comp.begin(), comp.end()) + std::size_t{1};
  std::vector<std::size_t> size(k, 0);
  std::vector<VertexId> first(k, kUnset);
  for (VertexId v = 0; v < n; ++v) {
    ++size[comp[v]];
    first[comp[v]] = std::min(first[comp[v]], v);
  }
  std::size_t core = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (size[c] > size[core] || (size[c] == size[core] && first[c] < first[core])) core = c;
  }

  std::vector<VertexId> core_vertices, in_set, out_set;
  for (VertexId v = 0; v < n; ++v)
    if (comp[v] == core) core_vertices.push_back(v);
  const auto downstream = sweep(g, core_vertices, Direction::forward);
  const auto upstream = sweep(g, core_vertices, Direction::backward);

  BowTie b;
  b.classes.assign(n, BowTieClass::disconnected);
  b.singleton_lscc = size[core] == 1;
  for (VertexId v = 0; v < n; ++v) {
    if (comp[v] == core) {
      b.classes[v] = BowTieClass::lscc;
    } else if (upstream[v]) {
      b.classes[v] = BowTieClass::in;
      in_set.push_back(v);
    } else if (downstream[v]) {
      b.classes[v] = BowTieClass::out;
      out_set.push_back(v);
    }
  }
  const auto from_in = sweep(g, in_set, Direction::forward);
  const auto to_out = sweep(g, out_set, Direction::backward);
  for (VertexId v = 0; v < n; ++v) {
    if (b.classes[v] != BowTieClass::disconnected) continue;
    if (from_in[v] && to_out[v]) {
      b.classes[v] = BowTieClass::tubes;
    } else if (from_in[v] || to_out[v]) {
      b.classes[v] = BowTieClass::tendrils;
    }
  }
  for (auto c : b.classes) ++b.counts[static_cast<std::size_t>(c)];
  return b;
}

nlohmann::json to_json(const BowTie& b) {
  nlohmann::json j;
  j["vertices"] = b.classes.size();
  j["singleton_lscc"] = b.singleton_lscc;
  for (auto c : kBowTieClasses) {
    j["counts"][std::string(to_string(c))] = b.count(c);
    j["percent"][std::string(to_string(c))] = 100.0 * b.fraction(c);
  }
  return j;
}

}  // namespace hsgraph
