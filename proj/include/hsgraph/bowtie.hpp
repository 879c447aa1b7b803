#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string_view>
#include <vector>

#include "hsgraph/graph.hpp"

namespace hsgraph {

enum class BowTieClass : std::uint8_t { lscc, in, out, tubes, tendrils, disconnected };

inline constexpr std::array<BowTieClass, 6> kBowTieClasses = {
    BowTieClass::lscc,  BowTieClass::in,       BowTieClass::out,
    BowTieClass::tubes, BowTieClass::tendrils, BowTieClass::disconnected};

/// "LSCC", "IN", "OUT", "TUBES", "TENDRILS", "DISCONNECTED".
std::string_view to_string(BowTieClass c);

struct BowTie {
  std::vector<BowTieClass> classes;  // per vertex
  std::array<std::size_t, 6> counts{};
  /// Graph has no cycle, so the LSCC is a single vertex picked by name.
  bool singleton_lscc = false;

  std::size_t count(BowTieClass c) const { return counts[static_cast<std::size_t>(c)]; }
  double fraction(BowTieClass c) const;
};

/// Strongly connected component id per vertex (iterative Tarjan).
std::vector<std::uint32_t> strong_components(const ServiceGraph& g);

/// The largest strongly connected component is the core; ties go to the
/// component holding the lexicographically smallest name. Throws
/// UsageError on undirected input and DataError on an empty graph.
BowTie bowtie_decompose(const ServiceGraph& g);

nlohmann::json to_json(const BowTie& b);

}  // namespace hsgraph
