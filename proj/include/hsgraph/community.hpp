#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hsgraph/graph.hpp"

namespace hsgraph {

/// Cluster label per vertex. Labels are dense from 0 and numbered in order
/// of first appearance over the (sorted) vertex list.
struct Partition {
  std::vector<std::string> vertices;
  std::vector<std::uint32_t> labels;

  std::size_t cluster_count() const;
  bool operator==(const Partition&) const = default;
};

/// Relabels densely in order of first appearance.
std::vector<std::uint32_t> dense_labels(std::span<const std::uint32_t> labels);

Partition make_partition(const ServiceGraph& g, std::span<const std::uint32_t> labels);

struct LouvainOptions {
  std::uint64_t seed = 0;
  double min_gain = 1e-12;
};

/// Weighted Louvain at resolution 1. Directed graphs are symmetrised with
/// w'(u,v) = w(u,v) + w(v,u). An edgeless graph yields singletons.
Partition louvain(const ServiceGraph& g, const LouvainOptions& opt = {});

/// Weighted modularity over the symmetrised graph. Throws DataError when
/// the partition does not cover the graph or the graph has no edges.
double modularity(const ServiceGraph& g, const Partition& p);

/// Adjusted mutual information with the exact hypergeometric expected MI
/// and arithmetic-mean normalisation. Throws DataError unless both
/// partitions list the same vertices.
double ami(const Partition& a, const Partition& b);
double ami(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// AMI on the vertices the two partitions share; empty when fewer than
/// two are shared.
std::optional<double> ami_on_common(const Partition& a, const Partition& b);

/// Restricts a partition to `keep` (sorted names), relabelling densely.
Partition restrict_partition(const Partition& p, std::span<const std::string> keep);

/// Sizes in non-increasing order.
std::vector<std::size_t> cluster_size_distribution(const Partition& p);

/// Header: vertex,cluster
std::string partition_csv(const Partition& p);
Partition parse_partition_csv(std::istream& in);

}  // namespace hsgraph
