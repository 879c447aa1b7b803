#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "hsgraph/graph.hpp"
#include "hsgraph/ingest.hpp"

namespace hsgraph {

/// Which link targets count as hidden services. Links outside the namespace
/// (surface-web hosts, junk) never create vertices or edges.
struct OnionNamespace {
  /// Only accept 16- or 56-character base32 labels (v2/v3 addresses).
  bool strict = false;

  bool contains(std::string_view id) const;
};

/// Directed service graph of one snapshot. Every crawled service becomes a
/// vertex; uncrawled link targets inside the namespace become vertices when
/// a crawled service links them. Edge weight = hyperlink occurrences.
/// Throws UsageError if the pages span several snapshots.
ServiceGraph build_dsg(std::span<const PageRecord> pages,
                       const OnionNamespace& ns = {});

/// Mutual-edge reduction. {u,v} survives iff u->v and v->u; its weight is the
/// smaller of the two. Edge-induced: vertices without a mutual edge vanish.
ServiceGraph to_usg(const ServiceGraph& dsg);

/// Edge-induced intersection, edges matched on endpoint names, weight = min.
/// Needs at least two graphs of one kind.
ServiceGraph intersect(std::span<const ServiceGraph> graphs);

/// Edge-induced union, weight = max over the graphs holding the edge.
/// A single graph is returned unchanged.
ServiceGraph unite(std::span<const ServiceGraph> graphs);

/// Weakly connected component label per vertex, labels numbered in order of
/// each component's smallest vertex.
std::vector<std::uint32_t> weak_components(const ServiceGraph& g);

/// Largest weakly connected component; ties go to the component holding the
/// lexicographically smallest vertex. Throws DataError on an empty graph.
ServiceGraph giant_wcc(const ServiceGraph& g);

}  // namespace hsgraph
