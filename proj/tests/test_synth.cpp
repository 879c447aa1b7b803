#include <algorithm>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "doctest.h"
#include "hsgraph/bowtie.hpp"
#include "hsgraph/ingest.hpp"
#include "hsgraph/stats.hpp"
#include "hsgraph/synth.hpp"
#include "hsgraph/transforms.hpp"

using namespace hsgraph;

namespace {

SynthOptions small(std::uint64_t seed = 5) {
  SynthOptions o;
  o.seed = seed;
  o.services = 400;
  o.community_a = 20;
  o.community_b = 12;
  return o;
}

std::vector<PageRecord> flatten(const SynthCorpus& c) {
  std::vector<PageRecord> all;
  for (const auto& s : c.pages) all.insert(all.end(), s.begin(), s.end());
  return all;
}

}  // namespace

TEST_CASE("same seed, same corpus") {
  const auto a = generate_corpus(small());
  const auto b = generate_corpus(small());
  REQUIRE(a.pages.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(pages_jsonl(a.pages[k]) == pages_jsonl(b.pages[k]));
  CHECK(a.labels_csv == b.labels_csv);
  CHECK(a.planted == b.planted);
  CHECK(pages_jsonl(generate_corpus(small(6)).pages[0]) != pages_jsonl(a.pages[0]));
}

TEST_CASE("jsonl round trip") {
  const auto c = generate_corpus(small());
  std::istringstream in(pages_jsonl(c.pages[1]));
  const auto back = parse_pages(in);
  REQUIRE(back.size() == c.pages[1].size());
  CHECK(back.front().service == c.pages[1].front().service);
  CHECK(back.back().links == c.pages[1].back().links);
}

TEST_CASE("retention is exact") {
  const auto c = generate_corpus(small());
  const auto report = persistence_report(flatten(c));
  CHECK(report.service_count == 400);
  const std::vector<std::string> all{"snp1", "snp2", "snp3"};
  CHECK(report.membership_counts.at(all) == c.planted["retained_all_snapshots"].get<std::size_t>());
  CHECK(report.membership_counts.at(all) == 280);
  // the volatile 120 spread over the six partial patterns
  CHECK(report.membership_counts.size() == 7);
}

TEST_CASE("planted communities are the only mutual structure") {
  const auto c = generate_corpus(small());
  std::set<std::string> planted;
  for (const auto& v : c.planted["community_a"]) planted.insert(v.get<std::string>());
  for (const auto& v : c.planted["community_b"]) planted.insert(v.get<std::string>());
  CHECK(planted.size() == 32);
  for (const auto& snap : c.pages) {
    const auto usg = to_usg(build_dsg(snap));
    for (const auto& name : usg.names()) CHECK(planted.contains(name));
  }
}

TEST_CASE("community A is the strongly connected core") {
  const auto c = generate_corpus(small());
  const auto g = build_dsg(c.pages[0]);
  const auto b = bowtie_decompose(g);
  CHECK(b.count(BowTieClass::lscc) == 20);
  CHECK(b.count(BowTieClass::in) == 0);
  for (const auto& v : c.planted["community_a"]) {
    CHECK(b.classes[*g.find(v.get<std::string>())] == BowTieClass::lscc);
  }
  CHECK(b.classes[*g.find(c.planted["hub"].get<std::string>())] == BowTieClass::out);
}

TEST_CASE("labels parse and cover the planted services") {
  const auto c = generate_corpus(small());
  std::istringstream in(c.labels_csv);
  const auto labels = parse_labels(in);
  CHECK(labels.labels.size() + labels.unknown > 32);
  CHECK(labels.labels.size() > 100);
}

TEST_CASE("bad options") {
  auto o = small();
  o.snapshots = 1;
  CHECK_THROWS(generate_corpus(o));
  o = small();
  o.community_b = o.community_a;
  CHECK_THROWS(generate_corpus(o));
  o = small();
  o.retention = 0.05;
  CHECK_THROWS(generate_corpus(o));
}
