#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hsgraph/community.hpp"
#include "hsgraph/error.hpp"
#include "oracles.hpp"

using namespace hsgraph;

namespace {

std::vector<std::uint32_t> labels(std::initializer_list<std::uint32_t> l) { return l; }

// k cliques of size s; clique i holds vertices [i*s, (i+1)*s).
GraphBuilder cliques(std::size_t k, std::size_t s, Directedness kind) {
  GraphBuilder b(kind);
  for (std::size_t c = 0; c < k; ++c)
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = i + 1; j < s; ++j)
        b.add_edge(oracle::vertex_name(c * s + i), oracle::vertex_name(c * s + j));
  return b;
}

Partition planted(std::size_t k, std::size_t s) {
  Partition p;
  for (std::size_t i = 0; i < k * s; ++i) {
    p.vertices.push_back(oracle::vertex_name(i));
    p.labels.push_back(static_cast<std::uint32_t>(i / s));
  }
  return p;
}

}  // namespace

TEST_CASE("two cliques joined by one edge") {
  for (auto kind : {Directedness::undirected, Directedness::directed}) {
    auto b = cliques(2, 5, kind);
    b.add_edge(oracle::vertex_name(4), oracle::vertex_name(5));
    const auto g = b.build();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto p = louvain(g, {seed});
      CHECK(ami(p, planted(2, 5)) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(modularity(g, p) >= modularity(g, planted(2, 5)) - 1e-12);
    }
  }
}

TEST_CASE("weight-planted clusters") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    GraphBuilder b(Directedness::undirected);
    for (std::size_t i = 0; i < 40; ++i)
      for (std::size_t j = i + 1; j < 40; ++j)
        if (i / 10 == j / 10 ? rng.bernoulli(0.7) : rng.bernoulli(0.05)) {
          b.add_edge(oracle::vertex_name(i), oracle::vertex_name(j), i / 10 == j / 10 ? 9 : 1);
        }
    const auto g = b.build();
    const auto p = louvain(g, {seed});
    CHECK(ami(p, planted(4, 10)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("small cases") {
  GraphBuilder b(Directedness::undirected);
  b.add_edge("A", "B");
  const auto g = b.build();
  const auto p = louvain(g);
  CHECK(p.cluster_count() == 1);
  const Partition singletons{{"A", "B"}, {0, 1}};
  CHECK(modularity(g, singletons) == -0.5);
  CHECK(modularity(g, p) == 0.0);

  GraphBuilder lone(Directedness::directed);
  lone.add_vertex("x");
  lone.add_vertex("y");
  CHECK(louvain(lone.build()).cluster_count() == 2);
  CHECK_THROWS_AS(modularity(lone.build(), Partition{{"x", "y"}, {0, 0}}), DataError);
  CHECK_THROWS_AS(modularity(g, Partition{{"A"}, {0}}), DataError);
}

TEST_CASE("modularity of two disconnected cliques") {
  const auto g = cliques(2, 4, Directedness::undirected).build();
  CHECK(modularity(g, planted(2, 4)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("louvain never loses to singletons and stays in range") {
  Rng rng(44);
  for (int t = 0; t < 30; ++t) {
    const auto g = oracle::random_graph(rng, 50, 0.08, t % 2 ? Directedness::directed : Directedness::undirected, 3);
    if (g.edge_count() == 0) continue;
    std::vector<std::uint32_t> ids(g.vertex_count());
    std::iota(ids.begin(), ids.end(), 0u);
    const auto p = louvain(g, {static_cast<std::uint64_t>(t)});
    const double q = modularity(g, p);
    CHECK(q >= modularity(g, make_partition(g, ids)) - 1e-12);
    CHECK(q <= 1.0);
    CHECK(q >= -0.5);
    // labels dense, first appearance order
    std::uint32_t next = 0;
    for (auto l : p.labels) {
      CHECK(l <= next);
      if (l == next) ++next;
    }
    CHECK(louvain(g, {static_cast<std::uint64_t>(t)}) == p);
  }
}

TEST_CASE("ami reference values and properties") {
  CHECK(ami(labels({0, 0, 0, 1, 1, 1, 2, 2}), labels({0, 0, 1, 1, 2, 2, 2, 2})) ==
        doctest::Approx(0.2745416497368333).epsilon(1e-12));
  CHECK(ami(labels({0, 1, 2, 0, 1, 2, 0, 1, 2, 3}), labels({0, 0, 0, 1, 1, 1, 2, 2, 2, 2})) ==
        doctest::Approx(-0.4091927448456475).epsilon(1e-12));

  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::uint32_t> a(200), b(200), perm = {4, 2, 0, 1, 3};
    for (auto& x : a) x = static_cast<std::uint32_t>(rng.below(5));
    for (auto& x : b) x = static_cast<std::uint32_t>(rng.below(3));
    CHECK(std::abs(ami(a, a) - 1.0) < 1e-9);
    CHECK(std::abs(ami(a, b) - ami(b, a)) < 1e-12);
    auto relabelled = a;
    for (auto& x : relabelled) x = perm[x];
    CHECK(std::abs(ami(relabelled, b) - ami(a, b)) < 1e-12);
    CHECK(std::abs(ami(a, relabelled) - 1.0) < 1e-9);
  }
  CHECK(ami(labels({0, 0, 0}), labels({1, 1, 1})) == 1.0);
  CHECK(ami(labels({0, 1, 2}), labels({0, 1, 2})) == 1.0);
  CHECK_THROWS_AS(ami(labels({0, 1}), labels({0, 1, 2})), DataError);
  CHECK_THROWS_AS(ami(Partition{{"a", "b"}, {0, 1}}, Partition{{"a", "c"}, {0, 1}}), DataError);
}

TEST_CASE("independent random partitions have AMI near zero") {
  Rng rng(6);
  double total = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::uint32_t> a(1000), b(1000);
    for (auto& x : a) x = static_cast<std::uint32_t>(rng.below(10));
    for (auto& x : b) x = static_cast<std::uint32_t>(rng.below(10));
    total += ami(a, b);
  }
  CHECK(std::abs(total / trials) <= 0.05);
}

TEST_CASE("common-vertex comparison and restriction") {
  const Partition a{{"a", "b", "c", "d"}, {0, 0, 1, 1}};
  const Partition b{{"b", "c", "d", "e"}, {0, 1, 1, 0}};
  const auto r = ami_on_common(a, b);
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(1.0));
  CHECK_FALSE(ami_on_common(a, Partition{{"d", "z"}, {0, 0}}).has_value());
  const std::vector<std::string> keep = {"c", "d"};
  const auto sub = restrict_partition(a, keep);
  CHECK(sub.labels == std::vector<std::uint32_t>{0, 0});
  const std::vector<std::string> missing = {"zz"};
  CHECK_THROWS_AS(restrict_partition(a, missing), DataError);
}

TEST_CASE("cluster sizes") {
  CHECK(cluster_size_distribution(Partition{{"a", "b", "c", "d", "e"}, {0, 1, 2, 3, 4}}) ==
        std::vector<std::size_t>{1, 1, 1, 1, 1});
  CHECK(cluster_size_distribution(Partition{{"a", "b", "c"}, {0, 0, 0}}) == std::vector<std::size_t>{3});
  Partition p;
  const std::vector<std::uint32_t> planted_labels = {1, 0, 0, 2, 0, 0, 0, 1, 0, 0};
  for (std::size_t i = 0; i < planted_labels.size(); ++i) p.vertices.push_back(oracle::vertex_name(i));
  p.labels = dense_labels(planted_labels);
  CHECK(cluster_size_distribution(p) == std::vector<std::size_t>{7, 2, 1});
}

TEST_CASE("partition csv round-trips") {
  const Partition p{{"a", "b,c", "d"}, {0, 1, 0}};
  std::istringstream in(partition_csv(p));
  CHECK(parse_partition_csv(in) == p);
  std::istringstream dup("vertex,cluster\na,0\na,1\n");
  CHECK_THROWS_AS(parse_partition_csv(dup), DataError);
}
