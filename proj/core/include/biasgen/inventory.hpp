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
// The phrase corruption inventory: per-source pair rows merged across
// recognizers, a per-original index with aggregated counts, corpus IDF
// statistics, and the IDF-based common-phrase filter.

#ifndef BIASGEN_INVENTORY_HPP_
#define BIASGEN_INVENTORY_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "biasgen/corpus_model.hpp"

namespace biasgen {

class Inventory {
 public:
  struct Variant {
    Phrase recog;
    std::uint64_t count = 0;  // summed over sources
  };

  // Aggregates rows by (orig, recog, source_id), summing counts. Rows
  // come out sorted by (orig, recog, source_id); variants per original
  // are sorted by descending total count, ties lexicographic.
  static Inventory from_pairs(std::span<const CorruptionPair> rows);

  const std::vector<CorruptionPair>& rows() const { return rows_; }
  const std::map<std::string, std::vector<Variant>>& index() const { return index_; }

  // nullptr when the original phrase is unknown.
  const std::vector<Variant>* variants(std::string_view orig) const;

  std::vector<Phrase> orig_phrases() const;
  // Every distinct phrase string on either side of a pair.
  std::vector<Phrase> all_phrases() const;

  std::size_t row_count() const { return rows_.size(); }
  std::size_t orig_count() const { return index_.size(); }
  bool empty() const { return rows_.empty(); }

 private:
  std::vector<CorruptionPair> rows_;
  std::map<std::string, std::vector<Variant>> index_;
};

// Merges per-recognizer pair streams. Each stream must already be
// deduplicated per (orig, recog, source_id); a duplicate inside one
// stream is an invariant breach and throws DataError.
Inventory merge_sources(std::span<const std::vector<CorruptionPair>> streams);

// Occurrence case statistics gathered during the IDF scan, keyed by
// phrase text: total corpus occurrences and how many start uppercase.
struct CaseCounts {
  std::uint64_t occurrences = 0;
  std::uint64_t uppercase = 0;
};
using CaseStats = std::unordered_map<std::string, CaseCounts>;

void write_case_stats(const std::string& path, const CaseStats& stats);
CaseStats read_case_stats(const std::string& path);

// Natural-log IDF over the paragraph corpus for every phrase that occurs
// at least once, plus per-word scores for every distinct word of every
// phrase. Membership is a lowercase word-boundary occurrence. When
// case_stats is non-null it receives per-phrase occurrence case counts
// from the same scan.
IdfTable compute_idf(std::span<const std::string> paragraphs,
                     std::span<const Phrase> phrases, int shard_count = 1,
                     CaseStats* case_stats = nullptr);

struct FilterThresholds {
  double phrase_min_idf = 4.0;
  double edge_word_min_idf = 3.0;
  // Multiplier applied to both thresholds for phrases whose corpus
  // occurrences are predominantly uppercase-initial (> 50%).
  double uppercase_relax_factor = 0.5;
};

// Drops original phrases that are too common: phrase IDF below the
// phrase threshold, or first/last word IDF below the edge-word
// threshold. Phrases absent from the corpus are kept (IDF +infinity).
// Output is a sub-inventory; re-filtering is idempotent.
Inventory filter_keys(const Inventory& inv, const IdfTable& idf,
                      const FilterThresholds& thresholds = {},
                      const CaseStats* case_stats = nullptr);

}  // namespace biasgen

#endif  // BIASGEN_INVENTORY_HPP_
