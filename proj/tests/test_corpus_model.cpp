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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "biasgen/corpus_model.hpp"
#include "biasgen/error.hpp"
#include "biasgen/io.hpp"
#include "biasgen/rng.hpp"

using namespace biasgen;

namespace {

std::string temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "biasgen_corpus_model_tests";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Phrase ph(const std::string& text) { return Phrase::parse(text); }

std::vector<std::string> kPoolWords = {
    "vormek", "talzun", "brikash", "lorfen", "drupim", "savquen", "doltal",
    "marbel", "roksil", "tervan", "osklin", "prajor", "wexhul", "cambor",
};

CorruptionPair random_pair(SplitRng& rng) {
  auto word = [&] { return kPoolWords[rng.uniform_u64(kPoolWords.size())]; };
  std::string orig = word();
  if (rng.bernoulli(0.4)) orig += " " + word();
  std::string recog = rng.bernoulli(0.2) ? orig : word();
  if (rng.bernoulli(0.3)) recog += " " + word();
  const char* sources[] = {"asr_a", "asr_b", "asr_c"};
  return CorruptionPair{ph(orig), ph(recog), rng.uniform_u64(100) + 1,
                        sources[rng.uniform_u64(3)]};
}

}  // namespace

TEST_CASE("phrase parse normalizes and validates") {
  Phrase p = Phrase::parse("  Congo\tRiver  ");
  CHECK(p.text == "congo river");
  CHECK(p.word_count == 2);

  CHECK(Phrase::parse("o'brien").text == "o'brien");
  CHECK(Phrase::parse("route 66").word_count == 2);

  CHECK(!Phrase::try_parse(""));
  CHECK(!Phrase::try_parse("   "));
  CHECK(!Phrase::try_parse("semi;colon"));
  CHECK(!Phrase::try_parse("caf\xc3\xa9"));  // non-ASCII rejected after ingest
  CHECK_THROWS_AS(Phrase::parse("tab\x01weird"), DataError);
}

TEST_CASE("corruption pair row format") {
  CorruptionPair pair{ph("bantu"), ph("band to"), 10, "asr_a"};
  CHECK(to_tsv_row(pair) == "bantu\tband to\t10\tasr_a");

  std::string path = temp_path("pairs.tsv");
  write_corruption_pairs(path, std::vector<CorruptionPair>{pair});
  CHECK(read_file(path) == "bantu\tband to\t10\tasr_a\n");
}

TEST_CASE("corruption pair parsing matches the inventory row") {
  std::string path = temp_path("congo.tsv");
  write_file(path, "congo\tcondo\t9\tasr_a\n");
  auto rows = read_corruption_pairs(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].orig.text == "congo");
  CHECK(rows[0].recog.text == "condo");
  CHECK(rows[0].count == 9);
  CHECK(rows[0].source_id == "asr_a");
}

TEST_CASE("empty file yields empty stream, zero records yield empty file") {
  std::string path = temp_path("empty.tsv");
  write_file(path, "");
  CHECK(read_corruption_pairs(path).empty());

  std::string out = temp_path("zero.tsv");
  write_related_pairs(out, std::vector<RelatedPair>{});
  CHECK(read_file(out).empty());
}

TEST_CASE("malformed rows report path and line number") {
  std::string path = temp_path("bad.tsv");
  write_file(path, "congo\tcondo\t9\tasr_a\ncongo\tcondo\n");
  try {
    read_corruption_pairs(path);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.line() == 2);
    CHECK(e.path() == path);
  }

  write_file(path, "congo\tcondo\t0\tasr_a\n");
  CHECK_THROWS_AS(read_corruption_pairs(path), SchemaError);
  write_file(path, "congo\tcondo\t9\tASR A\n");
  CHECK_THROWS_AS(read_corruption_pairs(path), SchemaError);
  write_file(path, "congo\tcondo\tnine\tasr_a\n");
  CHECK_THROWS_AS(read_corruption_pairs(path), SchemaError);
}

TEST_CASE("invalid utf-8 in text fields is a schema violation") {
  std::string path = temp_path("badutf8.tsv");
  write_file(path, std::string("7\tcongo\tthe \xff\xfe congo\n"));
  CHECK_THROWS_AS(read_paragraph_records(path), SchemaError);
}

TEST_CASE("paragraph record build finds overlapping occurrences") {
  std::vector<Phrase> keys = {ph("congo"), ph("republic of the congo"), ph("bantu")};
  auto rec = ParagraphRecord::build(
      0, "Mbesa is a Bantu language of the Democratic Republic of the Congo.", keys);
  REQUIRE(rec.occurrences.size() == 3);
  CHECK(rec.occurrences[0].key.text == "bantu");
  CHECK(rec.occurrences[0].uppercase_start);
  CHECK(rec.occurrences[1].key.text == "republic of the congo");
  CHECK(rec.occurrences[2].key.text == "congo");
  // nested span is contained in the longer one
  CHECK(rec.occurrences[1].span.contains(rec.occurrences[2].span));

  // word-boundary: "congolese" must not match "congo"
  auto rec2 = ParagraphRecord::build(1, "the congolese border", {keys.begin(), keys.begin() + 1});
  CHECK(rec2.occurrences.empty());
}

TEST_CASE("paragraph record round-trips through its table") {
  std::vector<Phrase> keys = {ph("congo"), ph("republic of the congo"), ph("mbesa"),
                              ph("bantu")};
  auto rec = ParagraphRecord::build(
      42, "Mbesa is a Bantu language of the Democratic Republic of the Congo.", keys);
  std::string path = temp_path("k2p.tsv");
  write_paragraph_records(path, std::vector<ParagraphRecord>{rec});
  auto rows = read_paragraph_records(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == rec);

  // a listed key that does not occur in the text is rejected
  write_file(path, "1\tcongo;zebra\tthe congo river\n");
  CHECK_THROWS_AS(read_paragraph_records(path), SchemaError);
}

TEST_CASE("related and false positive rows validate ranges") {
  std::string path = temp_path("rel.tsv");
  write_file(path, "lovecraftian\tlovecraft\t0.75\n");
  auto rows = read_related_pairs(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].similarity == doctest::Approx(0.75));

  write_file(path, "x\tx\t0.5\n");
  CHECK_THROWS_AS(read_related_pairs(path), SchemaError);
  write_file(path, "a\tb\t1.5\n");
  CHECK_THROWS_AS(read_related_pairs(path), SchemaError);

  write_file(path, "nuts and\tknutsen\t1\n");
  auto fps = read_false_positives(path);
  REQUIRE(fps.size() == 1);
  CHECK(fps[0].ngram.text == "nuts and");
  write_file(path, "nuts and\tknutsen\t0\n");
  CHECK_THROWS_AS(read_false_positives(path), SchemaError);
}

TEST_CASE("training example round-trip with tags and flags") {
  TrainingExample ex;
  ex.original_snippet = "the congo river";
  ex.corrupted_snippet = "the condo river";
  ex.substitutions.push_back(
      Substitution{Span{4, 9}, Span{4, 9}, ph("congo"), ph("condo")});
  ex.candidates = {
      Candidate{ph("vormek"), CandidateLabel::kRandom},
      Candidate{ph("congo"), CandidateLabel::kPositive},
      Candidate{ph("kongo"), CandidateLabel::kRelated},
      Candidate{ph("nuts and"), CandidateLabel::kFalsePositive},
  };
  ex.char_tags.assign(15, 0);
  for (std::size_t i = 4; i < 9; ++i) ex.char_tags[i] = 2;
  ex.no_correct_candidate = false;

  std::string path = temp_path("examples.tsv");
  write_training_examples(path, std::vector<TrainingExample>{ex});
  auto rows = read_training_examples(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == ex);

  // tag run-length encoding is stable
  std::string row = to_tsv_row(ex);
  CHECK(row.find("0x4,2x5,0x6") != std::string::npos);
}

TEST_CASE("training example validation rejects inconsistencies") {
  TrainingExample ex;
  ex.original_snippet = "the congo river";
  ex.corrupted_snippet = "the condo river";
  ex.substitutions.push_back(
      Substitution{Span{4, 9}, Span{4, 9}, ph("congo"), ph("condo")});
  ex.candidates = {Candidate{ph("congo"), CandidateLabel::kPositive}};
  ex.char_tags.assign(15, 0);
  // tags claim no substitution although a positive candidate matches
  CHECK_THROWS_AS(validate_training_example(ex), DataError);

  for (std::size_t i = 4; i < 9; ++i) ex.char_tags[i] = 1;
  CHECK_NOTHROW(validate_training_example(ex));

  // flag contradicting labels
  ex.no_correct_candidate = true;
  CHECK_THROWS_AS(validate_training_example(ex), DataError);
  ex.no_correct_candidate = false;

  // duplicate candidate text
  ex.candidates.push_back(Candidate{ph("congo"), CandidateLabel::kRandom});
  CHECK_THROWS_AS(validate_training_example(ex), DataError);
}

TEST_CASE("round-trip of random record batches is identity and stable") {
  SplitRng rng(7, 1, 2);
  std::vector<CorruptionPair> pairs;
  for (int i = 0; i < 10000; ++i) pairs.push_back(random_pair(rng));

  std::string path1 = temp_path("fuzz1.tsv");
  write_corruption_pairs(path1, pairs);
  auto back = read_corruption_pairs(path1);
  REQUIRE(back.size() == pairs.size());
  CHECK(back == pairs);

  // double serialization is byte-identical
  std::string path2 = temp_path("fuzz2.tsv");
  write_corruption_pairs(path2, back);
  CHECK(read_file(path1) == read_file(path2));
}

TEST_CASE("related and false-positive batches round-trip byte-stably") {
  SplitRng rng(8, 2, 3);
  auto word = [&] { return kPoolWords[rng.uniform_u64(kPoolWords.size())]; };

  std::vector<RelatedPair> related;
  for (int i = 0; i < 2000; ++i) {
    std::string key = word();
    std::string other = word();
    if (key == other) other += "x";
    double sim = 0.001 + 0.998 * rng.uniform_double();
    related.push_back(RelatedPair{ph(key), ph(other), sim});
  }
  std::string path1 = temp_path("rel_fuzz1.tsv");
  write_related_pairs(path1, related);
  auto rel_back = read_related_pairs(path1);
  CHECK(rel_back == related);
  std::string path2 = temp_path("rel_fuzz2.tsv");
  write_related_pairs(path2, rel_back);
  CHECK(read_file(path1) == read_file(path2));

  std::vector<FalsePositivePair> fps;
  for (int i = 0; i < 2000; ++i) {
    std::string ngram = word() + " " + word();
    std::string phrase = word();
    fps.push_back(FalsePositivePair{ph(ngram), ph(phrase), rng.uniform_u64(500) + 1});
  }
  std::string path3 = temp_path("fp_fuzz1.tsv");
  write_false_positives(path3, fps);
  CHECK(read_false_positives(path3) == fps);
}

TEST_CASE("serialization is injective on distinct records") {
  CHECK(to_tsv_row(CorruptionPair{ph("a"), ph("b c"), 1, "asr_a"}) !=
        to_tsv_row(CorruptionPair{ph("a b"), ph("c"), 1, "asr_a"}));
  CHECK(to_tsv_row(RelatedPair{ph("a"), ph("b"), 0.5}) !=
        to_tsv_row(RelatedPair{ph("a"), ph("b"), 0.50000001}));
}

TEST_CASE("gzip paths are transparent") {
  std::vector<CorruptionPair> pairs = {
      CorruptionPair{ph("congo"), ph("condo"), 9, "asr_a"},
      CorruptionPair{ph("bantu"), ph("band to"), 10, "asr_b"},
  };
  std::string path = temp_path("pairs.tsv.gz");
  write_corruption_pairs(path, pairs);
  CHECK(read_corruption_pairs(path) == pairs);
}

TEST_CASE("generic table dispatch enforces kinds") {
  std::vector<TableRecord> records;
  records.emplace_back(CorruptionPair{ph("congo"), ph("condo"), 9, "asr_a"});
  std::string path = temp_path("generic.tsv");
  write_table(path, TableKind::kKeys2Corruptions, records);

  std::size_t seen = 0;
  read_table(path, TableKind::kKeys2Corruptions, [&](TableRecord&& rec) {
    ++seen;
    CHECK(std::holds_alternative<CorruptionPair>(rec));
  });
  CHECK(seen == 1);

  CHECK_THROWS_AS(write_table(path, TableKind::kKeys2Related, records), DataError);
  CHECK(table_kind_from_name("falsepositives") == TableKind::kFalsePositives);
  CHECK(!table_kind_from_name("nope"));
}

TEST_CASE("idf table io round-trips") {
  IdfTable table;
  table.doc_count = 520;
  table.scores["congo"] = 4.17438726989563;
  table.scores["in the"] = 0.55;
  table.word_scores["congo"] = 4.0;
  std::string path = temp_path("idf.tsv");
  write_idf_table(path, table);
  IdfTable back = read_idf_table(path);
  CHECK(back.doc_count == table.doc_count);
  CHECK(back.phrase_idf("congo") == table.scores["congo"]);
  CHECK(back.word_idf("congo") == table.word_scores["congo"]);
  CHECK(!back.phrase_idf("zebra"));
}
