#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hsgraph/graph.hpp"
#include "hsgraph/metrics.hpp"

namespace hsgraph {

enum class ContentType : std::uint8_t { normal, suspicious };

struct ContentClass {
  std::string_view name;
  ContentType type;
};

/// The 26 thematic classes, Normal ones first.
std::span<const ContentClass> content_classes();

std::string_view to_string(ContentType t);

/// Index into content_classes(); case-insensitive. Empty for the Unknown
/// classes (Empty, Locked, Down) and for names that are not classes.
std::optional<std::size_t> find_content_class(std::string_view name);
bool is_unknown_class(std::string_view name);

struct Label {
  std::size_t content_class;
  std::string language;
  ContentType type() const;
};

struct LabelSet {
  std::map<std::string, Label, std::less<>> labels;
  std::size_t unknown = 0;  // rows dropped as Unknown
};

/// CSV `service,class,language`, header optional. Unknown-type rows are
/// counted and dropped; any other unrecognised class is a ParseError.
LabelSet parse_labels(std::istream& in);

/// Spearman rank correlation with average ranks for ties and pairwise
/// deletion of NaN entries. NaN when fewer than three pairs remain or
/// either side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
};

/// Over VertexMetrics::analysis_columns(); unit diagonal.
CorrelationMatrix spearman_matrix(const VertexMetrics& vm);
std::string correlation_csv(const CorrelationMatrix& m);

struct Prevalence {
  std::size_t vertices = 0;
  std::size_t labeled = 0;
  std::vector<std::size_t> counts;  // per content class
  double coverage() const;
  double fraction(std::size_t cls) const;
};

/// Throws DataError when no vertex of g carries a usable label.
Prevalence tag_prevalence(const LabelSet& labels, const ServiceGraph& g);
nlohmann::json to_json(const Prevalence& p);

struct GainResult {
  double p_weighted = 0.0;
  double p_uniform = 0.0;
  double gain = 0.0;  // bits
};

/// KL divergence (bits) between metric-proportional and uniform sampling
/// of the class indicator. Values must be finite and non-negative. Throws
/// DataError "uninformative metric" when they sum to zero and "degenerate
/// class" when the class covers none or all of the vertices.
GainResult info_gain(std::span<const double> values, std::span<const char> in_class);

struct GainCell {
  std::string metric;
  std::string target;  // class name, "Normal" or "Suspicious"
  GainResult result;   // NaN fields when the cell's preconditions fail
};

/// Every analysis metric against every class and both types, over the
/// labelled vertices where the metric is defined.
std::vector<GainCell> gain_report(const VertexMetrics& vm, const LabelSet& labels);

/// Header: metric,target,p_weighted,p_uniform,gain
std::string gain_csv(std::span<const GainCell> cells);

}  // namespace hsgraph
