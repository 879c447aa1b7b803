#include "hsgraph/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "hsgraph/error.hpp"
#include "hsgraph/parallel.hpp"
#include "hsgraph/textio.hpp"
#include "hsgraph/transforms.hpp"

namespace hsgraph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kSweepChunks = 16;

/// Reusable BFS state over out-arcs.
struct Bfs {
  std::vector<std::int32_t> dist;
  std::vector<VertexId> order;

  explicit Bfs(std::size_t n) : dist(n, -1) { order.reserve(n); }

  void run(const ServiceGraph& g, VertexId source) {
    for (auto v : order) dist[v] = -1;
    order.clear();
    dist[source] = 0;
    order.push_back(source);
    for (std::size_t head = 0; head < order.size(); ++head) {
      const auto v = order[head];
      for (const auto& a : g.out(v)) {
        if (dist[a.vertex] < 0) {
          dist[a.vertex] = dist[v] + 1;
          order.push_back(a.vertex);
        }
      }
    }
  }
};

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0 || syy <= 0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Per vertex: number of ordered pairs of distinct out-neighbours linked in
/// at least one direction, and the pair count k(k-1).
struct TriadCounts {
  std::vector<double> linked;
  std::vector<double> pairs;
};

TriadCounts triad_counts(const ServiceGraph& g) {
  const auto n = g.vertex_count();
  TriadCounts tc{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  std::vector<char> mark(n, 0);
  for (VertexId v = 0; v < n; ++v) {
    const auto nbrs = g.out(v);
    const double k = static_cast<double>(nbrs.size());
    tc.pairs[v] = k * (k - 1);
    if (nbrs.size() < 2) continue;
    for (const auto& a : nbrs) mark[a.vertex] = 1;
    std::uint64_t linked = 0;
    for (const auto& a : nbrs) {
      const auto u = a.vertex;
      for (const auto& b : g.out(u)) linked += mark[b.vertex];
      if (g.directed()) {
        for (const auto& b : g.in(u)) {
          if (mark[b.vertex] && !g.has_edge(u, b.vertex)) ++linked;
        }
      }
    }
    for (const auto& a : nbrs) mark[a.vertex] = 0;
    tc.linked[v] = static_cast<double>(linked);
  }
  return tc;
}

void normalize_l2(std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v * v;
  s = std::sqrt(s);
  if (s > 0) {
    for (double& v : x) v /= s;
  }
}

}  // namespace

DistanceStats distance_stats(const ServiceGraph& g) {
  const auto n = g.vertex_count();
  if (n < 2) throw DataError("distance statistics need at least two vertices");

  struct Partial {
    std::uint32_t diameter = 0;
    std::uint64_t sum = 0;
    std::uint64_t pairs = 0;
    double inverse_sum = 0;
  };
  std::vector<Partial> partial(std::min(kSweepChunks, n));
  parallel_chunks(n, partial.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
    Bfs bfs(n);
    auto& p = partial[c];
    for (auto s = static_cast<VertexId>(begin); s < end; ++s) {
      bfs.run(g, s);
      for (std::size_t i = 1; i < bfs.order.size(); ++i) {
        const auto d = static_cast<std::uint32_t>(bfs.dist[bfs.order[i]]);
        p.diameter = std::max(p.diameter, d);
        p.sum += d;
        ++p.pairs;
        p.inverse_sum += 1.0 / d;
      }
    }
  });

  DistanceStats out;
  Partial total;
  for (const auto& p : partial) {
    total.diameter = std::max(total.diameter, p.diameter);
    total.sum += p.sum;
    total.pairs += p.pairs;
    total.inverse_sum += p.inverse_sum;
  }
  out.connected_pairs = total.pairs;
  if (total.pairs > 0) {
    out.diameter = total.diameter;
    out.average = static_cast<double>(total.sum) / static_cast<double>(total.pairs);
  }
  const double nd = static_cast<double>(n);
  out.efficiency = total.inverse_sum / (nd * (nd - 1));
  return out;
}

std::optional<double> assortativity(const ServiceGraph& g) {
  std::vector<double> x, y;
  const auto m = g.edge_count();
  x.reserve(2 * m);
  y.reserve(2 * m);
  if (m < 2) return std::nullopt;
  for (const auto& e : g.edges()) {
    if (g.directed()) {
      x.push_back(static_cast<double>(g.out_degree(e.source)));
      y.push_back(static_cast<double>(g.in_degree(e.target)));
    } else {
      const auto du = static_cast<double>(g.degree(e.source));
      const auto dv = static_cast<double>(g.degree(e.target));
      x.push_back(du);
      y.push_back(dv);
      x.push_back(dv);
      y.push_back(du);
    }
  }
  return pearson(x, y);
}

double centralization(const ServiceGraph& g) {
  const auto n = g.vertex_count();
  if (n < 3) throw DataError("centralization needs at least three vertices");
  std::size_t max_deg = 0, sum = 0;
  for (VertexId v = 0; v < n; ++v) {
    const auto d = g.out_degree(v);  // neighbour count when undirected
    max_deg = std::max(max_deg, d);
    sum += d;
  }
  const double nd = static_cast<double>(n);
  const double num = nd * static_cast<double>(max_deg) - static_cast<double>(sum);
  const double den = g.directed() ? (nd - 1) * (nd - 1) : (nd - 1) * (nd - 2);
  return num / den;
}

std::optional<double> global_transitivity(const ServiceGraph& g) {
  const auto tc = triad_counts(g);
  const double linked = std::accumulate(tc.linked.begin(), tc.linked.end(), 0.0);
  const double pairs = std::accumulate(tc.pairs.begin(), tc.pairs.end(), 0.0);
  if (pairs <= 0) return std::nullopt;
  return linked / pairs;
}

std::vector<double> local_transitivity(const ServiceGraph& g) {
  const auto tc = triad_counts(g);
  std::vector<double> t(g.vertex_count(), kNaN);
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (tc.pairs[v] > 0) t[v] = tc.linked[v] / tc.pairs[v];
  }
  return t;
}

GlobalMetrics global_metrics(const ServiceGraph& g) {
  GlobalMetrics m;
  m.kind = g.kind();
  m.vertices = g.vertex_count();
  m.edges = g.edge_count();
  if (m.vertices == 0) throw DataError("global metrics of an empty graph");
  const double nd = static_cast<double>(m.vertices);
  const double md = static_cast<double>(m.edges);
  m.avg_degree = g.directed() ? md / nd : 2 * md / nd;
  m.assortativity = assortativity(g);
  m.distances = distance_stats(g);

  std::size_t max_in = 0, max_out = 0;
  for (VertexId v = 0; v < m.vertices; ++v) {
    max_in = std::max(max_in, g.in_degree(v));
    max_out = std::max(max_out, g.out_degree(v));
  }
  const auto cen = m.vertices >= 3 ? std::optional(centralization(g)) : std::nullopt;
  const auto trans = global_transitivity(g);
  if (g.directed()) {
    m.max_in_norm = static_cast<double>(max_in) / nd;
    m.max_out_norm = static_cast<double>(max_out) / nd;
    m.out_centralization = cen;
    m.transitivity = trans;
  } else {
    m.max_norm = static_cast<double>(max_out) / nd;
    m.centralization = cen;
    m.clustering = trans;
  }
  return m;
}

nlohmann::json to_json(const GlobalMetrics& m) {
  using nlohmann::json;
  const auto opt = [](const auto& v) -> json {
    if (v) return *v;
    return nullptr;
  };
  json j;
  j["kind"] = to_string(m.kind);
  j["N"] = m.vertices;
  j["M"] = m.edges;
  j["avg_degree"] = m.avg_degree;
  j["assortativity"] = opt(m.assortativity);
  j["diameter"] = opt(m.distances.diameter);
  j["avg_distance"] = opt(m.distances.average);
  j["global_efficiency"] = m.distances.efficiency;
  if (m.kind == Directedness::directed) {
    j["max_in_norm"] = opt(m.max_in_norm);
    j["max_out_norm"] = opt(m.max_out_norm);
    j["out_centralization"] = opt(m.out_centralization);
    j["transitivity"] = opt(m.transitivity);
  } else {
    j["max_norm"] = opt(m.max_norm);
    j["centralization"] = opt(m.centralization);
    j["clustering"] = opt(m.clustering);
  }
  return j;
}

std::vector<double> pagerank(const ServiceGraph& g, const RankOptions& opt) {
  const auto n = g.vertex_count();
  if (n == 0) return {};
  const double nd = static_cast<double>(n);
  std::vector<double> strength(n, 0.0);
  for (VertexId v = 0; v < n; ++v) {
    for (const auto& a : g.out(v)) strength[v] += opt.weighted ? static_cast<double>(a.weight) : 1.0;
  }
  std::vector<double> rank(n, 1.0 / nd), next(n);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    double dangling = 0;
    for (VertexId v = 0; v < n; ++v) {
      if (strength[v] == 0) dangling += rank[v];
    }
    const double base = (1.0 - opt.damping) / nd + opt.damping * dangling / nd;
    for (VertexId v = 0; v < n; ++v) {
      double s = 0;
      for (const auto& a : g.in(v)) {
        const double w = opt.weighted ? static_cast<double>(a.weight) : 1.0;
        s += rank[a.vertex] * w / strength[a.vertex];
      }
      next[v] = base + opt.damping * s;
    }
    double diff = 0;
    for (VertexId v = 0; v < n; ++v) diff += std::abs(next[v] - rank[v]);
    rank.swap(next);
    if (diff < opt.tolerance) break;
  }
  const double total = std::accumulate(rank.begin(), rank.end(), 0.0);
  for (double& r : rank) r /= total;
  return rank;
}

HitsScores hits(const ServiceGraph& g, const RankOptions& opt) {
  const auto n = g.vertex_count();
  HitsScores s;
  if (n == 0) return s;
  const double uniform = 1.0 / std::sqrt(static_cast<double>(n));
  s.hub.assign(n, uniform);
  s.authority.assign(n, uniform);
  if (g.edge_count() == 0) {
    s.converged = true;
    return s;
  }
  const auto w = [&](const Arc& a) { return opt.weighted ? static_cast<double>(a.weight) : 1.0; };
  std::vector<double> auth(n), hub(n);
  for (s.iterations = 1; s.iterations <= opt.max_iterations; ++s.iterations) {
    for (VertexId v = 0; v < n; ++v) {
      double x = 0;
      for (const auto& a : g.in(v)) x += w(a) * s.hub[a.vertex];
      auth[v] = x;
    }
    normalize_l2(auth);
    for (VertexId v = 0; v < n; ++v) {
      double x = 0;
      for (const auto& a : g.out(v)) x += w(a) * auth[a.vertex];
      hub[v] = x;
    }
    normalize_l2(hub);
    double diff = 0;
    for (VertexId v = 0; v < n; ++v) {
      diff += std::abs(auth[v] - s.authority[v]) + std::abs(hub[v] - s.hub[v]);
    }
    s.authority.swap(auth);
    s.hub.swap(hub);
    if (diff < opt.tolerance) {
      s.converged = true;
      break;
    }
  }
  return s;
}

PathMetrics path_metrics(const ServiceGraph& g) {
  const auto n = g.vertex_count();
  PathMetrics pm;
  pm.eccentricity.assign(n, 0.0);

  struct Partial {
    std::vector<double> betweenness;
    std::vector<double> efficiency_sum;
    std::vector<std::uint64_t> dist_into;
    std::vector<std::uint64_t> reach_into;
  };
  std::vector<Partial> partial(std::min(kSweepChunks, std::max<std::size_t>(n, 1)));

  parallel_chunks(n, partial.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& p = partial[c];
    p.betweenness.assign(n, 0.0);
    p.efficiency_sum.assign(n, 0.0);
    p.dist_into.assign(n, 0);
    p.reach_into.assign(n, 0);
    Bfs bfs(n);
    std::vector<double> sigma(n, 0.0), delta(n, 0.0);

    for (auto s = static_cast<VertexId>(begin); s < end; ++s) {
      for (auto v : bfs.order) sigma[v] = delta[v] = 0.0;
      bfs.run(g, s);
      const auto& dist = bfs.dist;
      sigma[s] = 1.0;
      for (auto v : bfs.order) {
        for (const auto& a : g.out(v)) {
          if (dist[a.vertex] == dist[v] + 1) sigma[a.vertex] += sigma[v];
        }
      }
      // Brandes dependency accumulation, farthest vertices first.
      for (auto it = bfs.order.rbegin(); it != bfs.order.rend(); ++it) {
        const auto w = *it;
        for (const auto& a : g.in(w)) {
          if (dist[a.vertex] == dist[w] - 1) {
            delta[a.vertex] += sigma[a.vertex] / sigma[w] * (1.0 + delta[w]);
          }
        }
        if (w != s) p.betweenness[w] += delta[w];
      }
      for (std::size_t i = 1; i < bfs.order.size(); ++i) {
        const auto t = bfs.order[i];
        p.dist_into[t] += static_cast<std::uint64_t>(dist[t]);
        ++p.reach_into[t];
      }
      pm.eccentricity[s] = static_cast<double>(dist[bfs.order.back()]);
      // s plays u in E(v) for every v with v -> s: add 1/dist(s, w) for the
      // other out-neighbours w of v.
      for (const auto& a : g.in(s)) {
        const auto v = a.vertex;
        double acc = 0;
        for (const auto& b : g.out(v)) {
          if (b.vertex != s && dist[b.vertex] > 0) acc += 1.0 / dist[b.vertex];
        }
        p.efficiency_sum[v] += acc;
      }
    }
  });

  pm.betweenness.assign(n, 0.0);
  std::vector<double> efficiency_sum(n, 0.0);
  std::vector<std::uint64_t> dist_into(n, 0), reach_into(n, 0);
  for (const auto& p : partial) {
    if (p.betweenness.empty()) continue;
    for (std::size_t v = 0; v < n; ++v) {
      pm.betweenness[v] += p.betweenness[v];
      efficiency_sum[v] += p.efficiency_sum[v];
      dist_into[v] += p.dist_into[v];
      reach_into[v] += p.reach_into[v];
    }
  }

  pm.closeness.assign(n, 0.0);
  pm.efficiency.assign(n, kNaN);
  const double others = static_cast<double>(n) - 1.0;
  for (VertexId v = 0; v < n; ++v) {
    if (reach_into[v] > 0) {
      const double r = static_cast<double>(reach_into[v]);
      pm.closeness[v] = (r / others) * (r / static_cast<double>(dist_into[v]));
    }
    const double k = static_cast<double>(g.out_degree(v));
    if (k >= 2) pm.efficiency[v] = efficiency_sum[v] / (k * (k - 1));
  }
  pm.transitivity = local_transitivity(g);
  return pm;
}

template <typename VM>
auto column_table(VM& vm) {
  using namespace std::string_view_literals;
  return std::array{
      std::pair{"in_degree"sv, &vm.in_degree},       std::pair{"out_degree"sv, &vm.out_degree},
      std::pair{"degree"sv, &vm.degree},             std::pair{"betweenness"sv, &vm.betweenness},
      std::pair{"closeness"sv, &vm.closeness},       std::pair{"pagerank"sv, &vm.pagerank},
      std::pair{"authscore"sv, &vm.authscore},       std::pair{"hubscore"sv, &vm.hubscore},
      std::pair{"efficiency"sv, &vm.efficiency},     std::pair{"transitivity"sv, &vm.transitivity},
      std::pair{"eccentricity"sv, &vm.eccentricity}, std::pair{"lcratio"sv, &vm.lcratio}};
}

std::vector<VertexMetrics::Column> VertexMetrics::all_columns() const {
  std::vector<Column> cols;
  for (const auto& [name, values] : column_table(*this)) cols.push_back({name, values});
  return cols;
}

std::vector<VertexMetrics::Column> VertexMetrics::analysis_columns() const {
  auto cols = all_columns();
  std::erase_if(cols, [&](const Column& c) {
    if (kind == Directedness::directed) return c.name == "degree";
    return c.name == "in_degree" || c.name == "out_degree";
  });
  return cols;
}

VertexMetrics vertex_metrics(const ServiceGraph& g,
                             const std::map<std::string, double>& lcratio,
                             const RankOptions& opt) {
  const auto n = g.vertex_count();
  VertexMetrics vm;
  vm.kind = g.kind();
  vm.vertices.assign(g.names().begin(), g.names().end());
  vm.in_degree.resize(n);
  vm.out_degree.resize(n);
  vm.degree.resize(n);
  vm.lcratio.assign(n, kNaN);
  for (VertexId v = 0; v < n; ++v) {
    vm.in_degree[v] = static_cast<double>(g.in_degree(v));
    vm.out_degree[v] = static_cast<double>(g.out_degree(v));
    vm.degree[v] = static_cast<double>(g.degree(v));
    if (auto it = lcratio.find(g.name(v)); it != lcratio.end()) vm.lcratio[v] = it->second;
  }
  auto pm = path_metrics(g);
  vm.betweenness = std::move(pm.betweenness);
  vm.closeness = std::move(pm.closeness);
  vm.eccentricity = std::move(pm.eccentricity);
  vm.efficiency = std::move(pm.efficiency);
  vm.transitivity = std::move(pm.transitivity);
  vm.pagerank = pagerank(g, opt);
  auto h = hits(g, opt);
  vm.hubscore = std::move(h.hub);
  vm.authscore = std::move(h.authority);
  return vm;
}

std::string vertex_metrics_csv(const VertexMetrics& vm) {
  std::ostringstream out;
  const auto cols = vm.all_columns();
  out << "vertex";
  for (const auto& c : cols) out << ',' << c.name;
  out << '\n';
  for (std::size_t i = 0; i < vm.vertices.size(); ++i) {
    out << csv_field(vm.vertices[i]);
    for (const auto& c : cols) out << ',' << format_number((*c.values)[i]);
    out << '\n';
  }
  return out.str();
}

VertexMetrics parse_vertex_metrics_csv(std::istream& in, Directedness kind) {
  VertexMetrics vm;
  vm.kind = kind;
  std::string text;
  if (!std::getline(in, text)) throw DataError("vertex metrics CSV is empty");
  if (!text.empty() && text.back() == '\r') text.pop_back();
  const auto header = split_csv(text);
  const auto table = column_table(vm);
  if (header.empty() || header[0] != "vertex") {
    throw ParseError(1, "", "expected header starting with 'vertex'");
  }
  std::vector<std::vector<double>*> slots;
  for (std::size_t i = 1; i < header.size(); ++i) {
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const auto& c) { return c.first == header[i]; });
    slots.push_back(it == table.end() ? nullptr : it->second);
  }
  for (const auto& [name, values] : table) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw ParseError(1, std::string(name), "missing column");
    }
  }
  std::size_t line = 1;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    const auto cells = split_csv(text);
    if (cells.size() != header.size()) throw ParseError(line, "", "column count mismatch");
    vm.vertices.push_back(cells[0]);
    for (std::size_t i = 1; i < cells.size(); ++i) {
      if (!slots[i - 1]) continue;
      try {
        slots[i - 1]->push_back(parse_number(cells[i]));
      } catch (const DataError& e) {
        throw ParseError(line, header[i], e.what());
      }
    }
  }
  return vm;
}

std::vector<double> hub_reach_curve(const ServiceGraph& g, std::size_t k) {
  if (k == 0) throw UsageError("hub count must be positive");
  const auto giant = giant_wcc(g);
  const auto n = giant.vertex_count();
  std::vector<VertexId> hubs(n);
  std::iota(hubs.begin(), hubs.end(), VertexId{0});
  std::stable_sort(hubs.begin(), hubs.end(), [&](VertexId a, VertexId b) {
    return giant.out_degree(a) > giant.out_degree(b);
  });
  hubs.resize(std::min(k, n));

  std::vector<char> covered(n, 0);
  std::size_t count = 0;
  const auto cover = [&](VertexId v) {
    if (!covered[v]) {
      covered[v] = 1;
      ++count;
    }
  };
  std::vector<double> curve;
  curve.reserve(hubs.size());
  for (auto h : hubs) {
    cover(h);
    for (const auto& a : giant.out(h)) cover(a.vertex);
    curve.push_back(static_cast<double>(count) / static_cast<double>(n));
  }
  return curve;
}

}  // namespace hsgraph
