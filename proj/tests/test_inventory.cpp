// Copyright 2026 The biasgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "biasgen/error.hpp"
#include "biasgen/inventory.hpp"
#include "biasgen/io.hpp"
#include "biasgen/rng.hpp"
#include "oracles.hpp"

using namespace biasgen;

namespace {

const std::string kFixtures = BIASGEN_FIXTURE_DIR;

Phrase ph(const std::string& text) { return Phrase::parse(text); }

CorruptionPair cp(const std::string& orig, const std::string& recog,
                  std::uint64_t count, const std::string& source) {
  return CorruptionPair{ph(orig), ph(recog), count, source};
}

}  // namespace

TEST_CASE("merge sums counts across sources") {
  std::vector<std::vector<CorruptionPair>> streams = {
      {cp("congo", "condo", 9, "asr_a")},
      {cp("congo", "condo", 3, "asr_b")},
  };
  Inventory inv = merge_sources(streams);
  const auto* variants = inv.variants("congo");
  REQUIRE(variants != nullptr);
  REQUIRE(variants->size() == 1);
  CHECK((*variants)[0].count == 12);
  CHECK(inv.rows().size() == 2);  // per-source rows preserved
}

TEST_CASE("single empty stream gives an empty inventory") {
  std::vector<std::vector<CorruptionPair>> streams(1);
  CHECK(merge_sources(streams).empty());
}

TEST_CASE("merge of singleton streams equals merge of their concatenation") {
  SplitRng rng(11, 0, 0);
  const char* words[] = {"vormek", "talzun", "brikash", "lorfen", "drupim"};
  const char* sources[] = {"asr_a", "asr_b", "asr_c"};
  std::vector<CorruptionPair> all;
  for (int i = 0; i < 60; ++i) {
    all.push_back(cp(words[rng.uniform_u64(5)], words[rng.uniform_u64(5)],
                     rng.uniform_u64(20) + 1, sources[rng.uniform_u64(3)]));
  }
  std::vector<std::vector<CorruptionPair>> singletons;
  for (const auto& row : all) singletons.push_back({row});
  Inventory merged_singletons = merge_sources(singletons);
  std::vector<std::vector<CorruptionPair>> one = {all};
  // concatenation may repeat (orig, recog, source) within one stream;
  // aggregate via from_pairs which has no per-stream dedup precondition
  Inventory merged_concat = Inventory::from_pairs(all);
  CHECK(merged_singletons.rows() == merged_concat.rows());

  // permutation invariance
  std::reverse(singletons.begin(), singletons.end());
  CHECK(merge_sources(singletons).rows() == merged_singletons.rows());
}

TEST_CASE("duplicate triple inside one stream is an invariant breach") {
  std::vector<std::vector<CorruptionPair>> streams = {
      {cp("congo", "condo", 9, "asr_a"), cp("congo", "condo", 1, "asr_a")},
  };
  CHECK_THROWS_AS(merge_sources(streams), DataError);
}

TEST_CASE("variants are ordered by descending count then lexicographically") {
  Inventory inv = Inventory::from_pairs(std::vector<CorruptionPair>{
      cp("bantu", "band to", 10, "asr_a"),
      cp("bantu", "bantu", 9, "asr_a"),
      cp("bantu", "ban to", 7, "asr_a"),
      cp("bantu", "than to", 1, "asr_a"),
      cp("bantu", "bad to", 1, "asr_a"),
  });
  const auto* variants = inv.variants("bantu");
  REQUIRE(variants != nullptr);
  REQUIRE(variants->size() == 5);
  CHECK((*variants)[0].recog.text == "band to");
  CHECK((*variants)[1].recog.text == "bantu");
  CHECK((*variants)[2].recog.text == "ban to");
  CHECK((*variants)[3].recog.text == "bad to");   // tie broken lexicographically
  CHECK((*variants)[4].recog.text == "than to");
}

TEST_CASE("idf of a phrase present in every paragraph is zero") {
  std::vector<std::string> paragraphs = {
      "the congo river", "near the congo", "Congo basin maps", "upper CONGO region"};
  IdfTable table = compute_idf(paragraphs, std::vector<Phrase>{ph("congo")});
  REQUIRE(table.phrase_idf("congo"));
  CHECK(*table.phrase_idf("congo") == 0.0);
}

TEST_CASE("idf of a phrase in one of four paragraphs is ln 4") {
  std::vector<std::string> paragraphs = {
      "the mbesa language", "the harvest fair", "a stone tower", "the winter road"};
  IdfTable table = compute_idf(paragraphs, std::vector<Phrase>{ph("mbesa")});
  REQUIRE(table.phrase_idf("mbesa"));
  CHECK(*table.phrase_idf("mbesa") == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("document frequency requires word boundaries on both ends") {
  std::vector<std::string> paragraphs = {"the congolese border", "the congo river"};
  IdfTable table = compute_idf(paragraphs, std::vector<Phrase>{ph("congo")});
  REQUIRE(table.phrase_idf("congo"));
  CHECK(*table.phrase_idf("congo") == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("idf matches the naive oracle bit for bit on a fixture slice") {
  auto corpus = read_lines(kFixtures + "/toy_corpus.txt");
  corpus.resize(100);
  auto pairs = read_corruption_pairs(kFixtures + "/toy_pairs.tsv");
  Inventory inv = Inventory::from_pairs(pairs);
  auto phrases = inv.all_phrases();
  phrases.resize(300);

  IdfTable table = compute_idf(corpus, phrases, /*shard_count=*/3);

  std::vector<std::string> phrase_texts;
  for (const auto& p : phrases) phrase_texts.push_back(p.text);
  auto expected = oracles::naive_idf(corpus, phrase_texts);

  std::size_t scored = 0;
  for (const auto& phrase : phrase_texts) {
    auto got = table.phrase_idf(phrase);
    auto it = expected.find(phrase);
    if (it == expected.end()) {
      CHECK(!got);
    } else {
      ++scored;
      REQUIRE(got);
      CHECK(*got == it->second);  // same expression, bit-equal
    }
  }
  CHECK(scored > 10);
  CHECK(table.doc_count == 100);
}

TEST_CASE("empty corpus is rejected") {
  CHECK_THROWS_AS(compute_idf({}, std::vector<Phrase>{ph("x")}), DataError);
}

TEST_CASE("filtering drops common phrases and common edge words") {
  std::vector<std::string> paragraphs;
  // 62 paragraphs: a df-1 phrase scores ln(62) = 4.13, above the 4.0 cut
  for (int i = 0; i < 60; ++i) paragraphs.push_back("words in the middle of things");
  paragraphs.push_back("Abraham wrote letters in the archive");
  paragraphs.push_back("the vormek inscription of the valley");

  Inventory inv = Inventory::from_pairs(std::vector<CorruptionPair>{
      cp("in the", "in the", 50, "asr_a"),
      cp("abraham of", "abraham off", 3, "asr_a"),
      cp("vormek", "vor mek", 2, "asr_a"),
      cp("never seen phrase", "never scene phrase", 1, "asr_a"),
  });
  IdfTable idf = compute_idf(paragraphs, inv.all_phrases());

  FilterThresholds thresholds;  // 4.0 / 3.0 defaults
  Inventory filtered = filter_keys(inv, idf, thresholds);

  CHECK(filtered.variants("in the") == nullptr);       // low phrase idf
  CHECK(filtered.variants("abraham of") == nullptr);   // low edge-word idf ("of")
  CHECK(filtered.variants("vormek") != nullptr);
  // absent from the corpus entirely: kept (idf treated as +infinity)
  CHECK(filtered.variants("never seen phrase") != nullptr);

  // refiltering is idempotent and output is a subset
  Inventory twice = filter_keys(filtered, idf, thresholds);
  CHECK(twice.rows() == filtered.rows());
  CHECK(filtered.rows().size() <= inv.rows().size());
}

TEST_CASE("predominantly uppercase occurrences relax the thresholds") {
  std::vector<std::string> paragraphs;
  // "Trieste" in 12 of 60 paragraphs, always uppercase-initial:
  // idf = ln(60/12) = 1.61, below the phrase threshold of 2.0 but above
  // the relaxed 1.0.
  for (int i = 0; i < 12; ++i) paragraphs.push_back("letters from Trieste arrived");
  for (int i = 0; i < 48; ++i) paragraphs.push_back("plain filler text here");

  Inventory inv = Inventory::from_pairs(
      std::vector<CorruptionPair>{cp("trieste", "tree est", 2, "asr_a")});
  CaseStats case_stats;
  IdfTable idf = compute_idf(paragraphs, inv.all_phrases(), 1, &case_stats);
  REQUIRE(case_stats.contains("trieste"));
  CHECK(case_stats.at("trieste").uppercase == case_stats.at("trieste").occurrences);

  FilterThresholds thresholds{2.0, 2.0, 0.5};
  CHECK(filter_keys(inv, idf, thresholds).variants("trieste") == nullptr);
  CHECK(filter_keys(inv, idf, thresholds, &case_stats).variants("trieste") != nullptr);
}

TEST_CASE("case stats io round-trips") {
  CaseStats stats;
  stats["congo"] = CaseCounts{8, 6};
  stats["in the"] = CaseCounts{300, 2};
  auto dir = std::filesystem::temp_directory_path() / "biasgen_inventory_tests";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "case_stats.tsv").string();
  write_case_stats(path, stats);
  CaseStats back = read_case_stats(path);
  CHECK(back.at("congo").occurrences == 8);
  CHECK(back.at("congo").uppercase == 6);
  CHECK(back.size() == 2);
}
