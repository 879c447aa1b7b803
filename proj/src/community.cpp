#include "hsgraph/community.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hsgraph/error.hpp"
#include "hsgraph/random.hpp"
#include "hsgraph/textio.hpp"

namespace hsgraph {

namespace {

/// Symmetric weighted graph used by the Louvain levels. `loop[i]` holds the
/// internal weight of an aggregated node counted over ordered pairs.
struct Level {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> adj;
  std::vector<double> loop;
  std::vector<double> strength;
};

Level symmetrised(const ServiceGraph& g) {
  const auto n = g.vertex_count();
  std::vector<std::map<std::uint32_t, double>> acc(n);
  for (const auto& e : g.edges()) {
    const auto w = static_cast<double>(e.weight);
    acc[e.source][e.target] += w;
    acc[e.target][e.source] += w;
  }
  Level lv;
  lv.adj.resize(n);
  lv.loop.assign(n, 0.0);
  lv.strength.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, w] : acc[i]) {
      lv.adj[i].emplace_back(j, w);
      lv.strength[i] += w;
    }
  }
  return lv;
}

/// One local-moving phase. Returns true when any node changed community.
bool move_nodes(const Level& lv, std::vector<std::uint32_t>& comm, double two_m, Rng& rng,
                double min_gain) {
  const auto n = lv.adj.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[comm[i]] += lv.strength[i];

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(std::span(order));

  std::vector<double> link(n, 0.0);
  std::vector<std::uint32_t> touched;
  bool any = false;
  for (bool moved = true; moved;) {
    moved = false;
    for (auto i : order) {
      const auto own = comm[i];
      const double k = lv.strength[i];
      touched.clear();
      for (const auto& [j, w] : lv.adj[i]) {
        if (link[comm[j]] == 0.0) touched.push_back(comm[j]);
        link[comm[j]] += w;
      }
      tot[own] -= k;
      // Gain of joining c, up to a common factor: link(i,c) - tot(c) k / 2m.
      auto gain = [&](std::uint32_t c) { return link[c] - tot[c] * k / two_m; };
      auto best = own;
      double best_gain = gain(own);
      std::sort(touched.begin(), touched.end());
      for (auto c : touched) {
        if (c == own) continue;
        const double g = gain(c);
        if (g > best_gain + min_gain) {
          best = c;
          best_gain = g;
        }
      }
      tot[best] += k;
      for (auto c : touched) link[c] = 0.0;
      if (best != own) {
        comm[i] = best;
        moved = true;
        any = true;
      }
    }
  }
  return any;
}

Level aggregate(const Level& lv, const std::vector<std::uint32_t>& comm, std::size_t count) {
  std::vector<std::map<std::uint32_t, double>> acc(count);
  Level next;
  next.loop.assign(count, 0.0);
  next.strength.assign(count, 0.0);
  for (std::size_t i = 0; i < lv.adj.size(); ++i) {
    const auto ci = comm[i];
    next.loop[ci] += lv.loop[i];
    next.strength[ci] += lv.strength[i];
    for (const auto& [j, w] : lv.adj[i]) {
      if (comm[j] == ci) {
        next.loop[ci] += w;
      } else {
        acc[ci][comm[j]] += w;
      }
    }
  }
  next.adj.resize(count);
  for (std::size_t c = 0; c < count; ++c) {
    for (const auto& [d, w] : acc[c]) next.adj[c].emplace_back(d, w);
  }
  return next;
}

double entropy(const std::vector<double>& sizes, double n) {
  double h = 0.0;
  for (double s : sizes)
    if (s > 0) h -= (s / n) * std::log(s / n);
  return h;
}

}  // namespace

std::size_t Partition::cluster_count() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + std::size_t{1};
}

std::vector<std::uint32_t> dense_labels(std::span<const std::uint32_t> labels) {
  std::unordered_map<std::uint32_t, std::uint32_t> seen;
  std::vector<std::uint32_t> out;
  out.reserve(labels.size());
  for (auto l : labels) {
    auto [it, fresh] = seen.try_emplace(l, static_cast<std::uint32_t>(seen.size()));
    out.push_back(it->second);
  }
  return out;
}

Partition make_partition(const ServiceGraph& g, std::span<const std::uint32_t> labels) {
  if (labels.size() != g.vertex_count()) throw DataError("partition does not cover the graph");
  return {{g.names().begin(), g.names().end()}, dense_labels(labels)};
}

Partition louvain(const ServiceGraph& g, const LouvainOptions& opt) {
  const auto n = g.vertex_count();
  std::vector<std::uint32_t> membership(n);
  std::iota(membership.begin(), membership.end(), 0u);
  Level lv = symmetrised(g);
  const double two_m = std::accumulate(lv.strength.begin(), lv.strength.end(), 0.0);
  if (two_m == 0.0) return make_partition(g, membership);

  Rng rng(opt.seed);
  while (true) {
    std::vector<std::uint32_t> comm(lv.adj.size());
    std::iota(comm.begin(), comm.end(), 0u);
    if (!move_nodes(lv, comm, two_m, rng, opt.min_gain)) break;
    comm = dense_labels(comm);
    const std::size_t count = *std::max_element(comm.begin(), comm.end()) + std::size_t{1};
    for (auto& m : membership) m = comm[m];
    lv = aggregate(lv, comm, count);
  }
  return make_partition(g, membership);
}

double modularity(const ServiceGraph& g, const Partition& p) {
  if (p.vertices.size() != g.vertex_count() ||
      !std::equal(p.vertices.begin(), p.vertices.end(), g.names().begin())) {
    throw DataError("partition does not cover the graph's vertices");
  }
  const auto k = p.cluster_count();
  std::vector<double> internal(k, 0.0), tot(k, 0.0);
  double two_m = 0.0;
  for (const auto& e : g.edges()) {
    const auto w = static_cast<double>(e.weight);
    const auto cu = p.labels[e.source], cv = p.labels[e.target];
    two_m += 2 * w;
    tot[cu] += w;
    tot[cv] += w;
    if (cu == cv) internal[cu] += 2 * w;
  }
  if (two_m == 0.0) throw DataError("modularity is undefined on a graph without edges");
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double share = tot[c] / two_m;
    q += internal[c] / two_m - share * share;
  }
  return q;
}

double ami(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) throw DataError("partitions cover different numbers of vertices");
  if (a.empty()) throw DataError("cannot compare empty partitions");
  const auto la = dense_labels(a), lb = dense_labels(b);
  const std::size_t ra = *std::max_element(la.begin(), la.end()) + std::size_t{1};
  const std::size_t rb = *std::max_element(lb.begin(), lb.end()) + std::size_t{1};
  const double n = static_cast<double>(a.size());

  std::map<std::pair<std::uint32_t, std::uint32_t>, double> table;
  std::vector<double> sa(ra, 0.0), sb(rb, 0.0);
  for (std::size_t i = 0; i < la.size(); ++i) {
    table[{la[i], lb[i]}] += 1;
    sa[la[i]] += 1;
    sb[lb[i]] += 1;
  }
  double mi = 0.0;
  for (const auto& [key, nij] : table) {
    mi += (nij / n) * std::log(n * nij / (sa[key.first] * sb[key.second]));
  }
  const double ha = entropy(sa, n), hb = entropy(sb, n);

  // Expected MI under the hypergeometric model.
  const double lg_n = std::lgamma(n + 1);
  double emi = 0.0;
  for (double ai : sa) {
    for (double bj : sb) {
      const double lo = std::max(1.0, ai + bj - n);
      const double hi = std::min(ai, bj);
      const double fixed = std::lgamma(ai + 1) + std::lgamma(bj + 1) + std::lgamma(n - ai + 1) +
                           std::lgamma(n - bj + 1) - lg_n;
      for (double nij = lo; nij <= hi; nij += 1) {
        const double log_p = fixed - std::lgamma(nij + 1) - std::lgamma(ai - nij + 1) -
                             std::lgamma(bj - nij + 1) - std::lgamma(n - ai - bj + nij + 1);
        emi += (nij / n) * std::log(n * nij / (ai * bj)) * std::exp(log_p);
      }
    }
  }
  const double denom = 0.5 * (ha + hb) - emi;
  if (std::abs(denom) < 1e-15) {
    return std::equal(la.begin(), la.end(), lb.begin()) ? 1.0 : 0.0;
  }
  // rounding can push identical partitions a hair past 1
  return std::min(1.0, (mi - emi) / denom);
}

double ami(const Partition& a, const Partition& b) {
  if (a.vertices != b.vertices) throw DataError("partitions are over different vertex sets");
  return ami(std::span<const std::uint32_t>(a.labels), std::span<const std::uint32_t>(b.labels));
}

Partition restrict_partition(const Partition& p, std::span<const std::string> keep) {
  Partition out;
  std::vector<std::uint32_t> labels;
  std::size_t i = 0;
  for (const auto& name : keep) {
    while (i < p.vertices.size() && p.vertices[i] < name) ++i;
    if (i == p.vertices.size() || p.vertices[i] != name) {
      throw DataError("vertex '" + name + "' is not in the partition");
    }
    out.vertices.push_back(name);
    labels.push_back(p.labels[i]);
  }
  out.labels = dense_labels(labels);
  return out;
}

std::optional<double> ami_on_common(const Partition& a, const Partition& b) {
  std::vector<std::string> common;
  std::set_intersection(a.vertices.begin(), a.vertices.end(), b.vertices.begin(),
                        b.vertices.end(), std::back_inserter(common));
  if (common.size() < 2) return std::nullopt;
  return ami(restrict_partition(a, common), restrict_partition(b, common));
}

std::vector<std::size_t> cluster_size_distribution(const Partition& p) {
  std::vector<std::size_t> sizes(p.cluster_count(), 0);
  for (auto l : p.labels) ++sizes[l];
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

std::string partition_csv(const Partition& p) {
  std::ostringstream out;
  out << "vertex,cluster\n";
  for (std::size_t i = 0; i < p.vertices.size(); ++i) {
    out << csv_field(p.vertices[i]) << ',' << p.labels[i] << '\n';
  }
  return out.str();
}

Partition parse_partition_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<std::string, std::uint32_t>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (lineno == 1 && line.rfind("vertex,", 0) == 0) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 2) throw ParseError(lineno, "", "expected vertex,cluster");
    std::uint32_t label = 0;
    const auto& f = fields[1];
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
    if (ec != std::errc() || ptr != f.data() + f.size()) {
      throw ParseError(lineno, "cluster", "not a non-negative integer");
    }
    rows.emplace_back(fields[0], label);
  }
  std::sort(rows.begin(), rows.end());
  Partition p;
  std::vector<std::uint32_t> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first == rows[i - 1].first) {
      throw DataError("vertex '" + rows[i].first + "' assigned twice");
    }
    p.vertices.push_back(rows[i].first);
    labels.push_back(rows[i].second);
  }
  p.labels = dense_labels(labels);
  return p;
}

}  // namespace hsgraph
