#include "hsgraph/stats.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "hsgraph/error.hpp"
#include "hsgraph/textio.hpp"

namespace hsgraph {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

constexpr std::array<ContentClass, 26> kClasses = {{
    {"Art", ContentType::normal},
    {"Casino", ContentType::normal},
    {"Cryptocurrency", ContentType::normal},
    {"Forum (Legal)", ContentType::normal},
    {"Hosting", ContentType::normal},
    {"Library", ContentType::normal},
    {"Marketplace (Legal)", ContentType::normal},
    {"Personal", ContentType::normal},
    {"Politics", ContentType::normal},
    {"Religion", ContentType::normal},
    {"Services (Legal)", ContentType::normal},
    {"Social-Network", ContentType::normal},
    {"Counterfeit Credit-Cards", ContentType::suspicious},
    {"Counterfeit Money", ContentType::suspicious},
    {"Counterfeit Personal-Identification", ContentType::suspicious},
    {"Cryptolocker", ContentType::suspicious},
    {"Drugs", ContentType::suspicious},
    {"Forum (Illegal)", ContentType::suspicious},
    {"Fraud", ContentType::suspicious},
    {"Hacking", ContentType::suspicious},
    {"Human-Trafficking", ContentType::suspicious},
    {"Leaked-Data", ContentType::suspicious},
    {"Marketplace (Illegal)", ContentType::suspicious},
    {"Porno", ContentType::suspicious},
    {"Services (Illegal)", ContentType::suspicious},
    {"Violence", ContentType::suspicious},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return kNaN;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// p log2(p / q) with 0 log 0 = 0.
double kl_term(double p, double q) { return p == 0.0 ? 0.0 : p * std::log2(p / q); }

}  // namespace

std::span<const ContentClass> content_classes() { return kClasses; }

std::string_view to_string(ContentType t) {
  return t == ContentType::normal ? "Normal" : "Suspicious";
}

std::optional<std::size_t> find_content_class(std::string_view name) {
  name = trim(name);
  for (std::size_t i = 0; i < kClasses.size(); ++i) {
    if (iequals(kClasses[i].name, name)) return i;
  }
  return std::nullopt;
}

bool is_unknown_class(std::string_view name) {
  name = trim(name);
  return iequals(name, "Empty") || iequals(name, "Locked") || iequals(name, "Down");
}

ContentType Label::type() const { return kClasses[content_class].type; }

LabelSet parse_labels(std::istream& in) {
  LabelSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (lineno == 1 && !fields.empty() && iequals(trim(fields[0]), "service")) continue;
    if (fields.size() < 2 || fields.size() > 3) {
      throw ParseError(lineno, "", "expected service,class,language");
    }
    const auto service = std::string(trim(fields[0]));
    if (service.empty()) throw ParseError(lineno, "service", "empty service id");
    if (is_unknown_class(fields[1])) {
      ++set.unknown;
      continue;
    }
    const auto cls = find_content_class(fields[1]);
    if (!cls) throw ParseError(lineno, "class", "unknown class '" + fields[1] + "'");
    Label label{*cls, fields.size() == 3 ? std::string(trim(fields[2])) : std::string()};
    if (!set.labels.emplace(service, std::move(label)).second) {
      throw ParseError(lineno, "service", "service '" + service + "' labelled twice");
    }
  }
  return set;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError("spearman: vectors differ in length");
  std::vector<double> a, b;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) continue;
    a.push_back(x[i]);
    b.push_back(y[i]);
  }
  if (a.size() < 3) return kNaN;
  return pearson(average_ranks(a), average_ranks(b));
}

CorrelationMatrix spearman_matrix(const VertexMetrics& vm) {
  const auto cols = vm.analysis_columns();
  CorrelationMatrix m;
  const auto k = cols.size();
  m.values.assign(k, std::vector<double>(k, 1.0));
  for (const auto& c : cols) m.names.emplace_back(c.name);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      m.values[i][j] = m.values[j][i] = spearman(*cols[i].values, *cols[j].values);
    }
  }
  return m;
}

std::string correlation_csv(const CorrelationMatrix& m) {
  std::ostringstream out;
  out << "metric";
  for (const auto& n : m.names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    out << m.names[i];
    for (double v : m.values[i]) out << ',' << format_number(v);
    out << '\n';
  }
  return out.str();
}

double Prevalence::coverage() const {
  return vertices == 0 ? 0.0 : static_cast<double>(labeled) / static_cast<double>(vertices);
}

double Prevalence::fraction(std::size_t cls) const {
  return labeled == 0 ? 0.0 : static_cast<double>(counts[cls]) / static_cast<double>(labeled);
}

Prevalence tag_prevalence(const LabelSet& labels, const ServiceGraph& g) {
  Prevalence p;
  p.vertices = g.vertex_count();
  p.counts.assign(kClasses.size(), 0);
  for (const auto& name : g.names()) {
    if (auto it = labels.labels.find(name); it != labels.labels.end()) {
      ++p.labeled;
      ++p.counts[it->second.content_class];
    }
  }
  if (p.labeled == 0) throw DataError("no labelled vertices in the graph");
  return p;
}

nlohmann::json to_json(const Prevalence& p) {
  nlohmann::json j;
  j["vertices"] = p.vertices;
  j["labeled"] = p.labeled;
  j["coverage"] = p.coverage();
  auto& classes = j["classes"] = nlohmann::json::array();
  for (std::size_t i = 0; i < kClasses.size(); ++i) {
    classes.push_back({{"class", kClasses[i].name},
                       {"type", to_string(kClasses[i].type)},
                       {"count", p.counts[i]},
                       {"fraction", p.fraction(i)}});
  }
  return j;
}

GainResult info_gain(std::span<const double> values, std::span<const char> in_class) {
  if (values.size() != in_class.size()) throw UsageError("info_gain: vectors differ in length");
  double top = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || std::isinf(v)) throw DataError("metric values must be finite and non-negative");
    top = std::max(top, v);
  }
  if (top == 0.0) throw DataError("uninformative metric");
  // Scaling by the maximum keeps a constant metric's sums exact integers.
  double total = 0.0, inside = 0.0, members = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i] / top;
    total += v;
    if (in_class[i]) {
      inside += v;
      members += 1.0;
    }
  }
  GainResult r;
  r.p_uniform = members / static_cast<double>(values.size());
  if (r.p_uniform == 0.0 || r.p_uniform == 1.0) throw DataError("degenerate class");
  r.p_weighted = inside / total;
  r.gain = kl_term(r.p_weighted, r.p_uniform) + kl_term(1.0 - r.p_weighted, 1.0 - r.p_uniform);
  return r;
}

std::vector<GainCell> gain_report(const VertexMetrics& vm, const LabelSet& labels) {
  std::vector<const Label*> label_of(vm.vertices.size(), nullptr);
  for (std::size_t i = 0; i < vm.vertices.size(); ++i) {
    if (auto it = labels.labels.find(vm.vertices[i]); it != labels.labels.end()) {
      label_of[i] = &it->second;
    }
  }
  std::vector<GainCell> cells;
  for (const auto& col : vm.analysis_columns()) {
    std::vector<double> values;
    std::vector<const Label*> who;
    for (std::size_t i = 0; i < vm.vertices.size(); ++i) {
      if (label_of[i] && !std::isnan((*col.values)[i])) {
        values.push_back((*col.values)[i]);
        who.push_back(label_of[i]);
      }
    }
    const auto cell = [&](std::string target, auto&& member) {
      std::vector<char> in(who.size());
      for (std::size_t i = 0; i < who.size(); ++i) in[i] = member(*who[i]) ? 1 : 0;
      GainCell c{std::string(col.name), std::move(target), {kNaN, kNaN, kNaN}};
      try {
        c.result = info_gain(values, in);
      } catch (const DataError&) {
        // cell left as not-a-value
      }
      cells.push_back(std::move(c));
    };
    for (std::size_t k = 0; k < kClasses.size(); ++k) {
      cell(std::string(kClasses[k].name), [k](const Label& l) { return l.content_class == k; });
    }
    for (auto t : {ContentType::normal, ContentType::suspicious}) {
      cell(std::string(to_string(t)), [t](const Label& l) { return l.type() == t; });
    }
  }
  return cells;
}

std::string gain_csv(std::span<const GainCell> cells) {
  std::ostringstream out;
  out << "metric,target,p_weighted,p_uniform,gain\n";
  for (const auto& c : cells) {
    out << c.metric << ',' << csv_field(c.target) << ',' << format_number(c.result.p_weighted) << ','
        << format_number(c.result.p_uniform) << ',' << format_number(c.result.gain) << '\n';
  }
  return out.str();
}

}  // namespace hsgraph
