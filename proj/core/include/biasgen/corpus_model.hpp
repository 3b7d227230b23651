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
//
// Domain types shared by every pipeline stage, plus their TSV table
// formats. All tables are UTF-8, tab-separated, newline-terminated, no
// header row. Column layouts:
//
//   keys2corruptions  orig \t recog \t count \t source_id
//   keys2paragraph    paragraph_id \t key;key;... \t text
//   keys2related      key \t related \t similarity
//   falsepositives    ngram \t phrase \t support
//   examples          original \t corrupted \t substitutions \t
//                     label:candidate (x list_size) \t char_tag_rle
//
// Writers produce deterministic bytes for a given record sequence, and
// read(write(x)) == x for every valid sequence.

#ifndef BIASGEN_CORPUS_MODEL_HPP_
#define BIASGEN_CORPUS_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "biasgen/text.hpp"

namespace biasgen {

// A normalized word sequence: non-empty, lowercase, single-space
// separated, drawn from [a-z0-9' ]. Ingest normalization (lowercasing,
// whitespace collapsing) is applied by parse(); anything else in the
// input is rejected.
struct Phrase {
  std::string text;
  int word_count = 0;

  static Phrase parse(std::string_view raw);
  static std::optional<Phrase> try_parse(std::string_view raw);

  std::vector<std::string_view> words() const { return split_words(text); }

  friend bool operator==(const Phrase& a, const Phrase& b) {
    return a.text == b.text;
  }
  friend auto operator<=>(const Phrase& a, const Phrase& b) {
    return a.text <=> b.text;
  }
};

// Identifier for the recognizer or procedure a corruption pair came from.
constexpr std::string_view kSubphraseSourceId = "subphrase-expansion";
bool is_valid_source_id(std::string_view s);

// One (original, recognized) phrase pair with its observation count.
struct CorruptionPair {
  Phrase orig;
  Phrase recog;  // may equal orig (self-recognition)
  std::uint64_t count = 1;
  std::string source_id;

  friend bool operator==(const CorruptionPair&, const CorruptionPair&) = default;
};

// One phrase occurrence inside a paragraph or snippet. `span` is in
// scalar offsets; the lowercased span text equals `key.text`.
struct Occurrence {
  Phrase key;
  Span span;
  bool uppercase_start = false;

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

// A corpus paragraph with every occurrence of the tracked keys, overlaps
// included. Canonical form: `occurrences` holds ALL word-boundary matches
// of the key set, sorted by start then descending length. build() is the
// only way to get a canonical record from raw parts.
struct ParagraphRecord {
  std::int64_t paragraph_id = 0;
  std::string text;  // original case
  std::vector<Occurrence> occurrences;

  static ParagraphRecord build(std::int64_t id, std::string_view text,
                               std::span<const Phrase> keys);

  // Distinct keys in lexicographic order (the serialized key list).
  std::vector<Phrase> key_set() const;

  friend bool operator==(const ParagraphRecord&, const ParagraphRecord&) = default;
};

// Naive per-key occurrence scan with word-boundary checks; the canonical
// definition of what "occurs in" means everywhere in this project.
std::vector<Occurrence> find_key_occurrences(std::string_view text,
                                             std::span<const Phrase> keys);

struct RelatedPair {
  Phrase key;
  Phrase related;   // != key
  double similarity = 0.0;  // in (0, 1)

  friend bool operator==(const RelatedPair&, const RelatedPair&) = default;
};

struct FalsePositivePair {
  Phrase ngram;   // common word n-gram occurring in real text
  Phrase phrase;  // biasing phrase accidentally similar to it, != ngram
  std::uint64_t support = 1;

  friend bool operator==(const FalsePositivePair&, const FalsePositivePair&) = default;
};

enum class CandidateLabel { kPositive, kRandom, kRelated, kFalsePositive };

std::string_view candidate_label_name(CandidateLabel label);
std::optional<CandidateLabel> candidate_label_from_name(std::string_view name);

struct Candidate {
  Phrase phrase;
  CandidateLabel label = CandidateLabel::kRandom;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

struct Substitution {
  Span orig_span;       // in original_snippet, scalar offsets
  Span corrupted_span;  // in corrupted_snippet, scalar offsets
  Phrase orig_phrase;
  Phrase corrupted_phrase;

  friend bool operator==(const Substitution&, const Substitution&) = default;
};

// One final training example: a corrupted snippet, its clean source, the
// substitutions that produced it, a fixed-size labeled candidate list and
// per-character tags over the corrupted snippet (0 = no candidate,
// i = candidates[i-1]).
struct TrainingExample {
  std::string original_snippet;
  std::string corrupted_snippet;
  std::vector<Substitution> substitutions;
  std::vector<Candidate> candidates;
  std::vector<int> char_tags;
  bool no_correct_candidate = false;

  friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

// Throws DataError describing the first violated invariant.
void validate_training_example(const TrainingExample& ex);

// Per-phrase and per-word inverse document frequencies over a paragraph
// corpus, natural log. Phrases absent from the corpus have no entry and
// are treated as +infinity by consumers.
struct IdfTable {
  std::uint64_t doc_count = 0;
  std::unordered_map<std::string, double> scores;
  std::unordered_map<std::string, double> word_scores;

  std::optional<double> phrase_idf(std::string_view phrase) const;
  std::optional<double> word_idf(std::string_view word) const;
};

void write_idf_table(const std::string& path, const IdfTable& table);
IdfTable read_idf_table(const std::string& path);

enum class TableKind {
  kKeys2Paragraph,
  kKeys2Corruptions,
  kKeys2Related,
  kFalsePositives,
  kExamples,
};

std::string_view table_kind_name(TableKind kind);
std::optional<TableKind> table_kind_from_name(std::string_view name);

using TableRecord = std::variant<CorruptionPair, ParagraphRecord, RelatedPair,
                                 FalsePositivePair, TrainingExample>;

// Row codecs. to_tsv_row() is the single source of the byte format;
// readers throw SchemaError with the 1-based line number on any
// malformed or invariant-breaking row.
std::string to_tsv_row(const CorruptionPair& rec);
std::string to_tsv_row(const ParagraphRecord& rec);
std::string to_tsv_row(const RelatedPair& rec);
std::string to_tsv_row(const FalsePositivePair& rec);
std::string to_tsv_row(const TrainingExample& rec);

// Streaming readers/writers per record type.
void for_each_corruption_pair(const std::string& path,
                              const std::function<void(CorruptionPair&&)>& fn);
void for_each_paragraph_record(const std::string& path,
                               const std::function<void(ParagraphRecord&&)>& fn);
void for_each_related_pair(const std::string& path,
                           const std::function<void(RelatedPair&&)>& fn);
void for_each_false_positive(const std::string& path,
                             const std::function<void(FalsePositivePair&&)>& fn);
void for_each_training_example(const std::string& path,
                               const std::function<void(TrainingExample&&)>& fn);

std::vector<CorruptionPair> read_corruption_pairs(const std::string& path);
std::vector<ParagraphRecord> read_paragraph_records(const std::string& path);
std::vector<RelatedPair> read_related_pairs(const std::string& path);
std::vector<FalsePositivePair> read_false_positives(const std::string& path);
std::vector<TrainingExample> read_training_examples(const std::string& path);

void write_corruption_pairs(const std::string& path, std::span<const CorruptionPair>);
void write_paragraph_records(const std::string& path, std::span<const ParagraphRecord>);
void write_related_pairs(const std::string& path, std::span<const RelatedPair>);
void write_false_positives(const std::string& path, std::span<const FalsePositivePair>);
void write_training_examples(const std::string& path, std::span<const TrainingExample>);

// Generic dispatch over TableKind.
void read_table(const std::string& path, TableKind kind,
                const std::function<void(TableRecord&&)>& sink);
void write_table(const std::string& path, TableKind kind,
                 std::span<const TableRecord> records);

}  // namespace biasgen

#endif  // BIASGEN_CORPUS_MODEL_HPP_
