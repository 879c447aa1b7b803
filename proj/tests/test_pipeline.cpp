#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "doctest.h"
#include "hsgraph/error.hpp"
#include "hsgraph/pipeline.hpp"
#include "hsgraph/synth.hpp"
#include "hsgraph/textio.hpp"

using namespace hsgraph;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hsgraph_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path small_corpus(const std::string& name) {
  const auto dir = scratch(name);
  SynthOptions o;
  o.seed = 11;
  o.services = 300;
  o.community_a = 16;
  o.community_b = 10;
  write_corpus(generate_corpus(o), dir);
  return dir;
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

}  // namespace

TEST_CASE("sha256 test vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing resolves paths against the config file") {
  const json doc = {{"pages", {"a.jsonl", "/abs/b.jsonl"}},
                    {"labels", "l.csv"},
                    {"output", "out"},
                    {"seeds", {{"louvain", 4}, {"fit", 9}}},
                    {"graphs", {{"intersection", false}}},
                    {"component", "whole"},
                    {"weighted_rank", "off"},
                    {"k_hubs", 10}};
  const auto cfg = config_from_json(doc, "/base");
  REQUIRE(cfg.pages.size() == 2);
  CHECK(cfg.pages[0] == fs::path("/base/a.jsonl"));
  CHECK(cfg.pages[1] == fs::path("/abs/b.jsonl"));
  CHECK(*cfg.labels == fs::path("/base/l.csv"));
  CHECK(cfg.output == fs::path("/base/out"));
  CHECK(cfg.seed_louvain == 4);
  CHECK(cfg.seed_fit == 9);
  CHECK_FALSE(cfg.intersection);
  CHECK(cfg.unite);
  CHECK(cfg.component == ComponentPolicy::whole);
  CHECK_FALSE(cfg.weighted_rank);
  CHECK(cfg.k_hubs == 10);

  CHECK_THROWS_AS(config_from_json({{"seeds", {{"luovain", 1}}}}, ""), UsageError);
  CHECK_THROWS_AS(config_from_json({{"k_hubs", -3}}, ""), UsageError);
  CHECK_THROWS_AS(config_from_json({{"component", "giant"}}, ""), UsageError);
}

TEST_CASE("override precedence: config, environment, --set") {
  auto cfg = config_from_json({{"seeds", {{"louvain", 1}, {"fit", 1}}}, {"k_hubs", 25}}, "");
  CHECK(env_name("seeds.louvain") == "HSGRAPH_SEEDS_LOUVAIN");
  const std::map<std::string, std::string> env{{"HSGRAPH_SEEDS_LOUVAIN", "7"},
                                               {"HSGRAPH_K_HUBS", "5"}};
  apply_environment(cfg, [&](const std::string& k) -> std::optional<std::string> {
    if (auto it = env.find(k); it != env.end()) return it->second;
    return std::nullopt;
  });
  CHECK(cfg.seed_louvain == 7);
  CHECK(cfg.k_hubs == 5);
  CHECK(cfg.seed_fit == 1);
  apply_override(cfg, "seeds.louvain=8");
  apply_override(cfg, "weighted_rank=off");
  apply_override(cfg, "pages=x.jsonl,y.jsonl");
  apply_override(cfg, "labels=");
  CHECK(cfg.seed_louvain == 8);
  CHECK_FALSE(cfg.weighted_rank);
  CHECK(cfg.pages == std::vector<fs::path>{"x.jsonl", "y.jsonl"});
  CHECK_FALSE(cfg.labels);
  CHECK_THROWS_AS(apply_override(cfg, "nokey"), UsageError);
  CHECK_THROWS_AS(apply_override(cfg, "colour=red"), UsageError);
}

TEST_CASE("validation") {
  RunConfig cfg;
  CHECK_THROWS_AS(validate(cfg), UsageError);
  cfg.pages = {"/definitely/missing.jsonl"};
  cfg.output = "/tmp/x";
  CHECK_THROWS_AS(validate(cfg), UsageError);
}

TEST_CASE("full run is reproducible and lists every artifact") {
  const auto dir = small_corpus("repro");
  auto cfg = load_config(dir / "config.json");
  cfg.output = dir / "run1";
  const auto first = run_pipeline(cfg);
  cfg.output = dir / "run2";
  run_pipeline(cfg);
  CHECK(read_file(dir / "run1" / "manifest.json") == read_file(dir / "run2" / "manifest.json"));
  CHECK_FALSE(fs::exists(dir / "run1.partial"));

  const auto manifest = read_json(dir / "run1" / "manifest.json");
  std::set<std::string> listed;
  for (const auto& a : manifest["artifacts"]) {
    const auto path = a["path"].get<std::string>();
    listed.insert(path);
    CHECK(sha256_hex(read_file(dir / "run1" / path)) == a["sha256"].get<std::string>());
  }
  std::set<std::string> on_disk;
  for (const auto& e : fs::recursive_directory_iterator(dir / "run1")) {
    if (e.is_regular_file()) on_disk.insert(fs::relative(e.path(), dir / "run1").generic_string());
  }
  on_disk.erase("manifest.json");
  CHECK(listed == on_disk);
  CHECK(first.artifacts.size() == listed.size());
  CHECK(listed.contains("stats/dsg-union.gain.csv"));
  CHECK(listed.contains("bowtie/dsg-snp1.json"));
  CHECK_FALSE(listed.contains("bowtie/usg-snp1.json"));
  CHECK(listed.contains("communities/ami.csv"));
  CHECK(listed.contains("ingest/persistence.json"));

  // a rerun into an earlier output replaces it
  cfg.output = dir / "run1";
  cfg.seed_louvain = 99;
  run_pipeline(cfg);
  CHECK(read_json(dir / "run1" / "manifest.json")["settings"]["seeds"]["louvain"] == 99);
}

TEST_CASE("no labels: label stages skipped and recorded") {
  const auto dir = small_corpus("nolabels");
  auto cfg = load_config(dir / "config.json");
  cfg.labels.reset();
  cfg.output = dir / "out";
  const auto summary = run_pipeline(cfg);
  const auto manifest = read_json(dir / "out" / "manifest.json");
  std::set<std::string> stages;
  for (const auto& s : manifest["skipped"]) stages.insert(s["stage"].get<std::string>());
  CHECK(stages.contains("labels"));
  CHECK(stages.contains("prevalence"));
  CHECK(stages.contains("gain"));
  for (const auto& a : summary.artifacts) {
    CHECK(a.find(".gain.csv") == std::string::npos);
    CHECK(a.find(".prevalence.json") == std::string::npos);
  }
}

TEST_CASE("empty intersection aborts with the stage name and leaves nothing") {
  const auto dir = scratch("empty");
  write_file_atomic(dir / "s1.jsonl",
                    R"({"snapshot":"s1","service":"a.onion","path":"/","depth":0,"chars":10,"links":["b.onion"]})"
                    "\n"
                    R"({"snapshot":"s1","service":"b.onion","path":"/","depth":0,"chars":10,"links":["a.onion"]})"
                    "\n");
  write_file_atomic(dir / "s2.jsonl",
                    R"({"snapshot":"s2","service":"c.onion","path":"/","depth":0,"chars":10,"links":["d.onion"]})"
                    "\n"
                    R"({"snapshot":"s2","service":"d.onion","path":"/","depth":0,"chars":10,"links":["c.onion"]})"
                    "\n");
  RunConfig cfg;
  cfg.pages = {dir / "s1.jsonl", dir / "s2.jsonl"};
  cfg.output = dir / "out";
  cfg.directed = false;
  cfg.per_snapshot = false;
  cfg.unite = false;
  try {
    run_pipeline(cfg);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).starts_with("graphs: "));
    CHECK(std::string(e.what()).find("usg-intersection") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(dir / "out"));
  CHECK_FALSE(fs::exists(dir / "out.partial"));
}

TEST_CASE("malformed input is a data error naming the file") {
  const auto dir = scratch("bad");
  write_file_atomic(dir / "s1.jsonl", "{\"snapshot\":\"s1\"}\n");
  RunConfig cfg;
  cfg.pages = {dir / "s1.jsonl"};
  cfg.output = dir / "out";
  try {
    run_pipeline(cfg);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("ingest: s1.jsonl: line 1") == 0);
  }
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("a foreign output directory is never replaced") {
  const auto dir = small_corpus("foreign");
  fs::create_directories(dir / "keep");
  write_file_atomic(dir / "keep" / "notes.txt", "mine");
  auto cfg = load_config(dir / "config.json");
  cfg.output = dir / "keep";
  CHECK_THROWS_AS(run_pipeline(cfg), UsageError);
  CHECK(read_file(dir / "keep" / "notes.txt") == "mine");
}
