#include "hsgraph/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hsgraph/error.hpp"
#include "hsgraph/fitting.hpp"
#include "hsgraph/random.hpp"
#include "hsgraph/stats.hpp"
#include "hsgraph/textio.hpp"

namespace hsgraph {

namespace {

constexpr std::string_view kBase32 = "abcdefghijklmnopqrstuvwxyz234567";

std::string onion_id(Rng& rng) {
  std::string s(16, 'a');
  for (auto& c : s) c = kBase32[rng.below(32)];
  return s + ".onion";
}

enum class Role { community_a, hub, community_b, linker, leaf };

struct Service {
  std::string id;
  Role role = Role::leaf;
  std::vector<char> present;  // per snapshot
  double attraction = 1.0;
  std::uint64_t tree_height = 0;
  bool stable_tree = true;
  // (target, persistent) pairs; non-persistent links flicker per snapshot
  std::vector<std::pair<std::size_t, bool>> links;
};

/// Weighted draw over order positions [from, n) via prefix sums.
class TargetPicker {
 public:
  explicit TargetPicker(const std::vector<Service>& order) : prefix_(order.size() + 1, 0.0) {
    for (std::size_t i = 0; i < order.size(); ++i) prefix_[i + 1] = prefix_[i] + order[i].attraction;
  }

  std::size_t draw(Rng& rng, std::size_t from) const {
    const double lo = prefix_[from];
    const double x = lo + rng.uniform() * (prefix_.back() - lo);
    auto it = std::upper_bound(prefix_.begin() + static_cast<std::ptrdiff_t>(from) + 1,
                               prefix_.end(), x);
    if (it == prefix_.end()) --it;
    return static_cast<std::size_t>(it - prefix_.begin()) - 1;
  }

 private:
  std::vector<double> prefix_;
};

void mutual_community(std::vector<Service>& order, std::size_t begin, std::size_t end,
                      double density, Rng& rng) {
  const auto link = [&](std::size_t u, std::size_t v) {
    order[u].links.emplace_back(v, true);
    order[v].links.emplace_back(u, true);
  };
  // a mutual ring keeps the community strongly connected whatever the draw
  for (std::size_t i = begin; i < end; ++i) link(i, i + 1 == end ? begin : i + 1);
  for (std::size_t i = begin; i < end; ++i) {
    for (std::size_t j = i + 2; j < end; ++j) {
      if (i == begin && j + 1 == end) continue;  // ring closure already there
      if (rng.bernoulli(density)) link(i, j);
    }
  }
}

std::string_view pick_class(Role role, Rng& rng) {
  static constexpr std::string_view market[] = {"Marketplace (Illegal)", "Drugs",
                                                "Counterfeit Credit-Cards"};
  static constexpr std::string_view forum[] = {"Forum (Legal)", "Politics", "Social-Network"};
  static constexpr std::string_view directory[] = {"Library", "Services (Legal)", "Hosting"};
  const auto classes = content_classes();
  switch (role) {
    case Role::community_a: return market[rng.below(3)];
    case Role::community_b: return forum[rng.below(3)];
    case Role::hub: return "Hosting";
    case Role::linker:
      if (rng.bernoulli(0.6)) return directory[rng.below(3)];
      break;
    case Role::leaf: break;
  }
  return classes[rng.below(classes.size())].name;
}

std::string pick_language(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.78) return "English";
  if (u < 0.88) return "Russian";
  if (u < 0.94) return "French";
  return "German";
}

}  // namespace

SynthCorpus generate_corpus(const SynthOptions& opt) {
  const std::size_t n = opt.services;
  const std::size_t fixed = opt.community_a + 1 + opt.community_b;
  if (opt.snapshots < 2) throw UsageError("synth: at least two snapshots");
  if (!(opt.retention > 0.0 && opt.retention <= 1.0)) throw UsageError("synth: retention in (0, 1]");
  const auto core = static_cast<std::size_t>(std::llround(opt.retention * static_cast<double>(n)));
  if (core < fixed || core > n) throw UsageError("synth: core too small for the planted structure");
  if (opt.community_a < 3 || opt.community_b < 3) throw UsageError("synth: communities need 3 members");
  if (opt.community_b >= opt.community_a) {
    throw UsageError("synth: community A must be the larger one");
  }

  Rng rng(opt.seed);
  std::set<std::string> used;
  std::vector<Service> order(n);
  for (auto& s : order) {
    do {
      s.id = onion_id(rng);
    } while (!used.insert(s.id).second);
  }

  // Topological order: A, hub, B, linkers, leaves.
  const std::size_t hub = opt.community_a;
  const std::size_t b_begin = hub + 1, b_end = b_begin + opt.community_b;
  const auto linkers = static_cast<std::size_t>(opt.linker_fraction * static_cast<double>(n - fixed));
  for (std::size_t i = 0; i < n; ++i) {
    order[i].role = i < hub       ? Role::community_a
                    : i == hub    ? Role::hub
                    : i < b_end   ? Role::community_b
                    : i < b_end + linkers ? Role::linker
                                          : Role::leaf;
  }

  // Snapshot membership: the planted roles are always in the core; the
  // rest of the core is a random draw, and the volatile services cycle
  // through every proper non-empty subset of snapshots.
  const std::size_t m = opt.snapshots;
  std::vector<std::size_t> rest(n - fixed);
  std::iota(rest.begin(), rest.end(), fixed);
  rng.shuffle(std::span(rest));
  for (auto& s : order) s.present.assign(m, 1);
  std::vector<std::vector<char>> patterns;
  for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << m); ++mask) {
    std::vector<char> p(m);
    for (std::size_t k = 0; k < m; ++k) p[k] = (mask >> k) & 1 ? 1 : 0;
    patterns.push_back(std::move(p));
  }
  for (std::size_t i = core - fixed; i < rest.size(); ++i) {
    order[rest[i]].present = patterns[(i - (core - fixed)) % patterns.size()];
  }

  for (auto& s : order) {
    s.attraction = std::pow(rng.open_uniform(), -1.0 / (opt.in_alpha - 1.0));
    s.tree_height = rng.below(4);
    s.stable_tree = rng.bernoulli(0.8);
  }

  mutual_community(order, 0, opt.community_a, opt.community_density, rng);
  mutual_community(order, b_begin, b_end, opt.community_density, rng);
  order[0].links.emplace_back(hub, true);
  for (int k = 0; k < 5; ++k) {
    order[rng.below(opt.community_a)].links.emplace_back(b_begin + rng.below(opt.community_b), true);
  }
  for (std::size_t i = b_begin; i < n; ++i) {
    const bool in_core = std::all_of(order[i].present.begin(), order[i].present.end(),
                                     [](char c) { return c != 0; });
    if (rng.bernoulli(in_core ? opt.hub_core_coverage : opt.hub_volatile_coverage)) {
      order[hub].links.emplace_back(i, true);
    }
  }

  const TargetPicker picker(order);
  const auto degrees = sample_power_law(rng, opt.out_alpha, 1, linkers);
  for (std::size_t j = 0; j < linkers; ++j) {
    const std::size_t i = b_end + j;
    const std::size_t room = (n - i - 1) / 4;
    const auto k = std::min<std::uint64_t>({degrees[j], opt.max_out_degree, room});
    std::set<std::size_t> chosen;
    while (chosen.size() < k) chosen.insert(picker.draw(rng, i + 1));
    for (auto t : chosen) order[i].links.emplace_back(t, rng.bernoulli(0.85));
  }

  SynthCorpus corpus;
  for (std::size_t k = 0; k < m; ++k) corpus.snapshot_ids.push_back("snp" + std::to_string(k + 1));
  corpus.pages.resize(m);

  std::size_t ghost_count = 0;
  for (std::size_t k = 0; k < m; ++k) {
    Rng snap_rng(opt.seed * 1000003 + k + 1);
    for (const auto& s : order) {
      if (!s.present[k]) continue;
      const auto height = s.stable_tree ? s.tree_height : snap_rng.below(4);
      const std::size_t page_count = 1 + height + snap_rng.below(3);
      std::vector<PageRecord> pages(page_count);
      for (std::size_t p = 0; p < page_count; ++p) {
        auto& rec = pages[p];
        rec.snapshot = corpus.snapshot_ids[k];
        rec.service = s.id;
        rec.depth = p == 0 ? 0 : std::min<std::uint64_t>(p, height);
        rec.path = p == 0 ? "/" : "/page" + std::to_string(p);
        const double scale = s.role == Role::linker || s.role == Role::hub ? 2000.0 : 6000.0;
        rec.chars = static_cast<std::uint64_t>(scale * std::exp(0.8 * snap_rng.normal()));
      }
      const auto place = [&](std::string target) {
        pages[snap_rng.below(page_count)].links.push_back(std::move(target));
      };
      for (const auto& [t, persistent] : s.links) {
        if (!persistent && !snap_rng.bernoulli(0.5)) continue;
        // duplicate hyperlinks become edge weight
        std::size_t copies = 1;
        while (copies < 6 && snap_rng.bernoulli(0.3)) ++copies;
        for (std::size_t c = 0; c < copies; ++c) place(order[t].id);
      }
      if (s.role == Role::linker && snap_rng.bernoulli(0.2)) {
        place("ghost" + std::to_string(ghost_count++) + ".onion");
      }
      const auto surface = snap_rng.below(3);
      for (std::uint64_t c = 0; c < surface; ++c) {
        place("www.site" + std::to_string(snap_rng.below(50)) + ".com");
      }
      for (auto& rec : pages) corpus.pages[k].push_back(std::move(rec));
    }
  }

  // Labels cover a random share of services; a few carry Unknown types.
  std::ostringstream labels;
  labels << "service,class,language\n";
  std::vector<std::size_t> by_name(n);
  std::iota(by_name.begin(), by_name.end(), std::size_t{0});
  std::sort(by_name.begin(), by_name.end(),
            [&](auto a, auto b) { return order[a].id < order[b].id; });
  static constexpr std::string_view unknown[] = {"Empty", "Locked", "Down"};
  for (auto i : by_name) {
    const bool planted = order[i].role == Role::community_a || order[i].role == Role::community_b ||
                         order[i].role == Role::hub;
    if (!planted && !rng.bernoulli(opt.labelled_fraction)) continue;
    const auto cls = rng.bernoulli(opt.unknown_label_fraction) ? unknown[rng.below(3)]
                                                                : pick_class(order[i].role, rng);
    labels << order[i].id << ',' << csv_field(cls) << ',' << pick_language(rng) << '\n';
  }
  corpus.labels_csv = labels.str();

  auto& planted = corpus.planted;
  planted["seed"] = opt.seed;
  planted["services"] = n;
  planted["snapshots"] = corpus.snapshot_ids;
  planted["retained_all_snapshots"] = core;
  planted["hub"] = order[hub].id;
  const auto members = [&](std::size_t begin, std::size_t end) {
    std::vector<std::string> ids;
    for (std::size_t i = begin; i < end; ++i) ids.push_back(order[i].id);
    std::sort(ids.begin(), ids.end());
    return ids;
  };
  planted["community_a"] = members(0, opt.community_a);
  planted["community_b"] = members(b_begin, b_end);
  planted["linkers"] = linkers;
  planted["settings"] = {{"retention", opt.retention},
                         {"hub_core_coverage", opt.hub_core_coverage},
                         {"hub_volatile_coverage", opt.hub_volatile_coverage},
                         {"community_density", opt.community_density},
                         {"linker_fraction", opt.linker_fraction},
                         {"out_alpha", opt.out_alpha},
                         {"max_out_degree", opt.max_out_degree},
                         {"in_alpha", opt.in_alpha},
                         {"labelled_fraction", opt.labelled_fraction}};
  return corpus;
}

std::string pages_jsonl(const std::vector<PageRecord>& pages) {
  std::string out;
  for (const auto& p : pages) {
    nlohmann::ordered_json j;
    j["snapshot"] = p.snapshot;
    j["service"] = p.service;
    j["path"] = p.path;
    j["depth"] = p.depth;
    j["chars"] = p.chars;
    j["links"] = p.links;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_corpus(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json config;
  config["pages"] = nlohmann::json::array();
  for (std::size_t k = 0; k < corpus.pages.size(); ++k) {
    const auto file = corpus.snapshot_ids[k] + ".jsonl";
    write_file_atomic(dir / file, pages_jsonl(corpus.pages[k]));
    config["pages"].push_back(file);
  }
  write_file_atomic(dir / "labels.csv", corpus.labels_csv);
  write_file_atomic(dir / "planted.json", corpus.planted.dump(2) + "\n");
  config["labels"] = "labels.csv";
  config["output"] = "out";
  config["component"] = "giant-wcc";
  config["weighted_rank"] = true;
  config["k_hubs"] = 25;
  config["seeds"] = {{"louvain", 1}, {"fit", 1}};
  write_file_atomic(dir / "config.json", config.dump(2) + "\n");
}

}  // namespace hsgraph
