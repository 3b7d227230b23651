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

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "biasgen/error.hpp"
#include "biasgen/synthesizer.hpp"
#include "oracles.hpp"

using namespace biasgen;

namespace {

Phrase ph(const std::string& text) { return Phrase::parse(text); }

CorruptionPair cp(const std::string& orig, const std::string& recog,
                  std::uint64_t count = 1) {
  return CorruptionPair{ph(orig), ph(recog), count, "asr_a"};
}

Inventory table2_inventory() {
  return Inventory::from_pairs(std::vector<CorruptionPair>{
      cp("congo", "congo", 133), cp("congo", "condo", 9), cp("congo", "connt go", 1),
      cp("congo", "go", 1), cp("congo", "kango", 1), cp("congo", "come go", 1),
      cp("congo", "calgo", 1), cp("congo", "kongo", 1),
      cp("bantu", "band to", 10), cp("bantu", "bantu", 9), cp("bantu", "ban to", 7),
      cp("bantu", "bant to", 6), cp("bantu", "banta", 2), cp("bantu", "than too", 1),
      cp("bantu", "than to", 1), cp("bantu", "bad to", 1),
      cp("mbesa", "besa", 3), cp("mbesa", "mbesa", 2),
      cp("republic of the congo", "republic of the kongo", 2),
      cp("knutsen", "nuts and", 3),
  });
}

std::vector<Phrase> big_pool() {
  std::vector<Phrase> pool;
  const char* words[] = {"vormek", "talzun", "brikash", "lorfen", "drupim", "savquen",
                         "doltal", "marbel", "roksil", "tervan", "osklin", "prajor",
                         "wexhul", "cambor", "zunpim", "galnur"};
  for (const char* w : words) pool.push_back(ph(w));
  return pool;
}

const std::string kMbesaText =
    "Mbesa is a Bantu language of the Democratic Republic of the Congo.";

ParagraphRecord mbesa_record() {
  return ParagraphRecord::build(
      0, kMbesaText,
      std::vector<Phrase>{ph("mbesa"), ph("bantu"), ph("republic of the congo"),
                          ph("congo")});
}

}  // namespace

TEST_CASE("strategy validation enforces the candidate budget") {
  SamplingStrategy strategy;
  CHECK_NOTHROW(strategy.validate());
  CHECK(strategy.max_positives() == 4);

  strategy.fp_range = IntRange{1, 7};
  CHECK_THROWS_AS(strategy.validate(), ConfigError);
  strategy.fp_range = IntRange{1, 3};
  strategy.p_correct = 1.5;
  CHECK_THROWS_AS(strategy.validate(), ConfigError);
  strategy.p_correct = 0.5;
  strategy.snippet_word_range = IntRange{0, 5};
  CHECK_THROWS_AS(strategy.validate(), ConfigError);
}

TEST_CASE("short paragraphs return the whole text as the window") {
  auto record = ParagraphRecord::build(3, "the Vormek stone",
                                       std::vector<Phrase>{ph("vormek")});
  SamplingStrategy strategy;  // window 5..25, paragraph has 3 words
  SplitRng rng(1, 3, 0);
  auto snippet = cut_snippet(record, {}, strategy, rng);
  REQUIRE(snippet);
  CHECK(snippet->text == "the Vormek stone");
  REQUIRE(snippet->occurrences.size() == 1);
  CHECK(snippet->occurrences[0].span == Span{4, 10});
}

TEST_CASE("a key inside a skip span rejects the paragraph") {
  auto record = ParagraphRecord::build(5, "the code 99999 vormek entry",
                                       std::vector<Phrase>{ph("vormek")});
  // skip span covering "99999 vormek"
  std::vector<Span> skips = {Span{9, 21}};
  SamplingStrategy strategy;
  SplitRng rng(1, 5, 0);
  CHECK(!cut_snippet(record, skips, strategy, rng));

  // windows that avoid the span are still found when the key is outside it
  auto record2 = ParagraphRecord::build(
      6, "the vormek entry sits beside the code 999998887776 in the margin",
      std::vector<Phrase>{ph("vormek")});
  std::vector<Span> skips2 = {Span{38, 50}};
  bool found = false;
  for (std::uint64_t attempt = 0; attempt < 20 && !found; ++attempt) {
    SplitRng rng2(attempt, 6, 0);
    auto snippet = cut_snippet(record2, skips2, strategy, rng2);
    if (snippet) {
      found = true;
      CHECK(snippet->text.find("999998887776") == std::string::npos);
    }
  }
  CHECK(found);
}

TEST_CASE("overlapping occurrences resolve leftmost-longest") {
  auto record = mbesa_record();
  SamplingStrategy strategy;
  strategy.snippet_word_range = IntRange{12, 12};  // whole paragraph
  SplitRng rng(7, 0, 0);
  auto snippet = cut_snippet(record, {}, strategy, rng);
  REQUIRE(snippet);
  std::vector<std::string> kept;
  for (const auto& occ : snippet->occurrences) kept.push_back(occ.key.text);
  CHECK(kept == std::vector<std::string>{"mbesa", "bantu", "republic of the congo"});
}

TEST_CASE("corruption substitutes sampled variants and recomputes spans") {
  auto record = mbesa_record();
  SamplingStrategy strategy;
  strategy.snippet_word_range = IntRange{12, 12};
  Inventory inv = table2_inventory();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SplitRng rng(seed, 0, 0);
    auto snippet = cut_snippet(record, {}, strategy, rng);
    REQUIRE(snippet);
    auto result = corrupt_snippet(*snippet, inv, strategy, rng);
    REQUIRE(result.substitutions.size() == 3);
    std::u32string corrupted = utf8_decode_or_throw(result.corrupted, "corrupted");
    for (const auto& sub : result.substitutions) {
      auto slice = utf8_encode(ascii_lower_copy(std::u32string_view(corrupted).substr(
          sub.corrupted_span.begin, sub.corrupted_span.length())));
      CHECK(slice == sub.corrupted_phrase.text);
    }
  }
}

TEST_CASE("single-variant inventories corrupt a snippet to a known hypothesis") {
  auto record = ParagraphRecord::build(
      2, "discworld noir transitions into more dark fantasy and lovecraftian horror",
      std::vector<Phrase>{ph("discworld noir"), ph("lovecraftian")});
  Inventory inv = Inventory::from_pairs(std::vector<CorruptionPair>{
      cp("discworld noir", "discorled nowhere", 4),
      cp("lovecraftian", "low crash and", 3),
  });
  SamplingStrategy strategy;
  strategy.snippet_word_range = IntRange{10, 10};  // the whole 10-word line
  SplitRng rng(77, 2, 0);
  auto snippet = cut_snippet(record, {}, strategy, rng);
  REQUIRE(snippet);
  auto result = corrupt_snippet(*snippet, inv, strategy, rng);
  CHECK(result.corrupted ==
        "discorled nowhere transitions into more dark fantasy and low crash and horror");
  REQUIRE(result.substitutions.size() == 2);
  CHECK(result.substitutions[0].corrupted_phrase.text == "discorled nowhere");
  CHECK(result.substitutions[1].corrupted_phrase.text == "low crash and");
}

TEST_CASE("an inventory with only a self-variant keeps the text identical") {
  auto record = ParagraphRecord::build(9, "beside the congo river bend",
                                       std::vector<Phrase>{ph("congo")});
  Inventory inv =
      Inventory::from_pairs(std::vector<CorruptionPair>{cp("congo", "congo", 133)});
  SamplingStrategy strategy;
  SplitRng rng(2, 9, 0);
  auto snippet = cut_snippet(record, {}, strategy, rng);
  REQUIRE(snippet);
  auto result = corrupt_snippet(*snippet, inv, strategy, rng);
  CHECK(result.corrupted == ascii_lower_copy(snippet->text));
  REQUIRE(result.substitutions.size() == 1);
  CHECK(result.substitutions[0].orig_phrase.text ==
        result.substitutions[0].corrupted_phrase.text);

  // with self-replacement disallowed and no proper variants, the
  // occurrence is left unsubstituted
  strategy.allow_self_replacement = false;
  SplitRng rng2(2, 9, 1);
  auto snippet2 = cut_snippet(record, {}, strategy, rng2);
  REQUIRE(snippet2);
  auto result2 = corrupt_snippet(*snippet2, inv, strategy, rng2);
  CHECK(result2.substitutions.empty());
}

TEST_CASE("missing inventory keys are an error") {
  auto record = ParagraphRecord::build(4, "the vormek stone",
                                       std::vector<Phrase>{ph("vormek")});
  Inventory inv = table2_inventory();
  SamplingStrategy strategy;
  SplitRng rng(1, 4, 0);
  auto snippet = cut_snippet(record, {}, strategy, rng);
  REQUIRE(snippet);
  CHECK_THROWS_AS(corrupt_snippet(*snippet, inv, strategy, rng), DataError);
}

TEST_CASE("variant sampling follows the inventory count proportions") {
  auto record = ParagraphRecord::build(1, "the Bantu settlement",
                                       std::vector<Phrase>{ph("bantu")});
  Inventory inv = table2_inventory();
  SamplingStrategy strategy;

  std::map<std::string, std::uint64_t> observed;
  const std::uint64_t draws = 10000;
  for (std::uint64_t i = 0; i < draws; ++i) {
    SplitRng rng(4242, 1, i);
    auto snippet = cut_snippet(record, {}, strategy, rng);
    REQUIRE(snippet);
    auto result = corrupt_snippet(*snippet, inv, strategy, rng);
    REQUIRE(result.substitutions.size() == 1);
    ++observed[result.substitutions[0].corrupted_phrase.text];
  }

  std::map<std::string, double> proportions;
  double total = 37.0;  // sum of the bantu variant counts
  proportions["band to"] = 10 / total;
  proportions["bantu"] = 9 / total;
  proportions["ban to"] = 7 / total;
  proportions["bant to"] = 6 / total;
  proportions["banta"] = 2 / total;
  proportions["than too"] = 1 / total;
  proportions["than to"] = 1 / total;
  proportions["bad to"] = 1 / total;
  CHECK(oracles::multinomial_within_3_sigma(observed, proportions, draws));
}

TEST_CASE("biasing list assembly respects quotas and dedupes") {
  NegativePools pools = NegativePools::build(
      {RelatedPair{ph("knutsen"), ph("knudsen"), 0.8}},
      {FalsePositivePair{ph("nuts and"), ph("knutsen"), 1},
       FalsePositivePair{ph("nuts and"), ph("newton"), 2}});
  auto pool = big_pool();
  SamplingStrategy strategy;
  strategy.p_correct = 1.0;

  std::vector<Phrase> positives = {ph("knutsen")};
  SplitRng rng(7, 0, 0);
  auto list = assemble_biasing_list(positives, pools, pool,
                                    "chopped nuts and soaked in honey", strategy, rng);
  CHECK(list.positives_included);
  REQUIRE(list.candidates.size() == 10);

  std::set<std::string> texts;
  int positives_seen = 0, fp_seen = 0, related_seen = 0, random_seen = 0;
  for (const auto& cand : list.candidates) {
    CHECK(texts.insert(cand.phrase.text).second);  // no duplicates
    switch (cand.label) {
      case CandidateLabel::kPositive: ++positives_seen; break;
      case CandidateLabel::kFalsePositive: ++fp_seen; break;
      case CandidateLabel::kRelated: ++related_seen; break;
      case CandidateLabel::kRandom: ++random_seen; break;
    }
  }
  CHECK(positives_seen == 1);
  // "knutsen" is excluded from the fp draw as a duplicate of the
  // positive, leaving "newton" as the only available false positive.
  CHECK(fp_seen == 1);
  CHECK(related_seen == 1);
  CHECK(positives_seen + fp_seen + related_seen + random_seen == 10);
}

TEST_CASE("with certain correctness and empty pools the list is positives plus random") {
  NegativePools pools = NegativePools::build({}, {});
  SamplingStrategy strategy;
  strategy.p_correct = 1.0;
  SplitRng rng(3, 0, 0);
  auto list = assemble_biasing_list(std::vector<Phrase>{ph("congo")}, pools, big_pool(),
                                    "near the condo river", strategy, rng);
  REQUIRE(list.candidates.size() == 10);
  int positives_seen = 0;
  for (const auto& cand : list.candidates) {
    if (cand.label == CandidateLabel::kPositive) {
      ++positives_seen;
    } else {
      CHECK(cand.label == CandidateLabel::kRandom);
    }
  }
  CHECK(positives_seen == 1);
}

TEST_CASE("a too-small global pool is an error") {
  NegativePools pools = NegativePools::build({}, {});
  SamplingStrategy strategy;
  std::vector<Phrase> tiny = {ph("one"), ph("two")};
  SplitRng rng(1, 0, 0);
  CHECK_THROWS_AS(assemble_biasing_list(std::vector<Phrase>{ph("congo")}, pools, tiny,
                                        "text", strategy, rng),
                  DataError);
}

TEST_CASE("emitted examples carry candidate tags over substituted spans") {
  auto record = mbesa_record();
  Inventory inv = table2_inventory();
  NegativePools pools = NegativePools::build({}, {});
  SamplingStrategy strategy;
  strategy.snippet_word_range = IntRange{12, 12};
  strategy.p_correct = 1.0;

  SplitRng rng(11, 0, 0);
  auto snippet = cut_snippet(record, {}, strategy, rng);
  REQUIRE(snippet);
  auto corruption = corrupt_snippet(*snippet, inv, strategy, rng);
  std::vector<Phrase> positives;
  for (const auto& sub : corruption.substitutions) {
    positives.push_back(sub.orig_phrase);
  }
  auto list = assemble_biasing_list(positives, pools, big_pool(), corruption.corrupted,
                                    strategy, rng);
  auto ex = emit_example(*snippet, corruption, list);

  CHECK(!ex.no_correct_candidate);
  CHECK(ex.char_tags.size() == scalar_length(ex.corrupted_snippet));
  // de-tagging reconstructs each substitution's corrupted phrase
  std::u32string corrupted = utf8_decode_or_throw(ex.corrupted_snippet, "corrupted");
  for (const auto& sub : ex.substitutions) {
    int tag = ex.char_tags[sub.corrupted_span.begin];
    REQUIRE(tag >= 1);
    CHECK(ex.candidates[static_cast<std::size_t>(tag - 1)].phrase.text ==
          sub.orig_phrase.text);
    for (std::size_t p = sub.corrupted_span.begin; p < sub.corrupted_span.end; ++p) {
      CHECK(ex.char_tags[p] == tag);
    }
  }

  // the no-correct branch zeroes every tag
  SamplingStrategy no_correct = strategy;
  no_correct.p_correct = 0.0;
  SplitRng rng2(12, 0, 0);
  auto snippet2 = cut_snippet(record, {}, no_correct, rng2);
  REQUIRE(snippet2);
  auto corruption2 = corrupt_snippet(*snippet2, inv, no_correct, rng2);
  std::vector<Phrase> positives2;
  for (const auto& sub : corruption2.substitutions) positives2.push_back(sub.orig_phrase);
  auto list2 = assemble_biasing_list(positives2, pools, big_pool(),
                                     corruption2.corrupted, no_correct, rng2);
  auto ex2 = emit_example(*snippet2, corruption2, list2);
  CHECK(ex2.no_correct_candidate);
  CHECK(!ex2.substitutions.empty());  // corrupted text with no candidate
  for (int tag : ex2.char_tags) CHECK(tag == 0);
}

TEST_CASE("generation is reproducible and ordered") {
  std::vector<ParagraphRecord> records = {
      mbesa_record(),
      ParagraphRecord::build(1, "the Bantu settlement was mapped and the Congo river "
                                "was drawn beside the northern road",
                             std::vector<Phrase>{ph("bantu"), ph("congo")}),
  };
  Inventory inv = table2_inventory();
  NegativePools pools = NegativePools::build({}, {});
  auto pool = big_pool();

  SynthesisInputs inputs;
  inputs.records = records;
  inputs.inventory = &inv;
  inputs.pools = &pools;
  inputs.global_pool = pool;

  SamplingStrategy strategy;
  strategy.rng_seed = 555;

  auto a = generate_examples(inputs, strategy, 40);
  auto b = generate_examples(inputs, strategy, 40, /*shard_count=*/3);
  CHECK(a == b);

  strategy.rng_seed = 556;
  auto c = generate_examples(inputs, strategy, 40);
  CHECK(a != c);

  for (const auto& ex : a) {
    CHECK(ex.candidates.size() == 10);
    CHECK_NOTHROW(validate_training_example(ex));
  }
}

TEST_CASE("generated examples round-trip through the examples table") {
  std::vector<ParagraphRecord> records = {
      mbesa_record(),
      ParagraphRecord::build(1, "the Bantu settlement near the Congo was mapped in "
                                "detail during the expedition",
                             std::vector<Phrase>{ph("bantu"), ph("congo")}),
  };
  Inventory inv = table2_inventory();
  NegativePools pools = NegativePools::build(
      {RelatedPair{ph("bantu"), ph("banto"), 0.8}},
      {FalsePositivePair{ph("language"), ph("languish"), 4}});
  auto pool = big_pool();

  SynthesisInputs inputs;
  inputs.records = records;
  inputs.inventory = &inv;
  inputs.pools = &pools;
  inputs.global_pool = pool;

  SamplingStrategy strategy;
  strategy.rng_seed = 999;
  auto examples = generate_examples(inputs, strategy, 200);

  auto dir = std::filesystem::temp_directory_path() / "biasgen_synth_tests";
  std::filesystem::create_directories(dir);
  std::string path = (dir / "examples.tsv").string();
  write_training_examples(path, examples);
  auto back = read_training_examples(path);
  CHECK(back == examples);
}

TEST_CASE("label accounting holds over a generated batch") {
  std::vector<ParagraphRecord> records = {mbesa_record()};
  Inventory inv = table2_inventory();
  NegativePools pools = NegativePools::build(
      {RelatedPair{ph("bantu"), ph("banto"), 0.8},
       RelatedPair{ph("mbesa"), ph("mbela"), 0.8}},
      {FalsePositivePair{ph("language"), ph("languish"), 4}});
  auto pool = big_pool();

  SynthesisInputs inputs;
  inputs.records = records;
  inputs.inventory = &inv;
  inputs.pools = &pools;
  inputs.global_pool = pool;

  SamplingStrategy strategy;
  strategy.rng_seed = 77;

  auto examples = generate_examples(inputs, strategy, 300);
  int with_related = 0;
  for (const auto& ex : examples) {
    int positives_seen = 0, related_seen = 0, fp_seen = 0, random_seen = 0;
    for (const auto& cand : ex.candidates) {
      switch (cand.label) {
        case CandidateLabel::kPositive: ++positives_seen; break;
        case CandidateLabel::kRelated: ++related_seen; break;
        case CandidateLabel::kFalsePositive: ++fp_seen; break;
        case CandidateLabel::kRandom: ++random_seen; break;
      }
    }
    CHECK(positives_seen + related_seen + fp_seen + random_seen == 10);
    CHECK(related_seen <= 3);
    if (ex.no_correct_candidate) CHECK(related_seen == 0);
    if (related_seen > 0) ++with_related;
    // fp ngram "language" appears in every snippet that contains it
    CHECK(fp_seen <= 3);
  }
  CHECK(with_related > 0);
}
