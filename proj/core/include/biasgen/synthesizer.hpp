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
// Final training-example generation: cut a snippet around phrase
// occurrences, substitute corrupted variants sampled from the inventory,
// assemble a labeled biasing list with hard negatives, and emit the
// tagged example.

#ifndef BIASGEN_SYNTHESIZER_HPP_
#define BIASGEN_SYNTHESIZER_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biasgen/corpus_model.hpp"
#include "biasgen/inventory.hpp"
#include "biasgen/negative_miner.hpp"
#include "biasgen/rng.hpp"

namespace biasgen {

struct IntRange {
  int min = 0;
  int max = 0;
};

struct SamplingStrategy {
  int list_size = 10;
  double p_correct = 0.5;
  IntRange fp_range{1, 3};
  int max_related = 3;
  bool allow_self_replacement = true;
  IntRange snippet_word_range{5, 25};
  std::uint64_t rng_seed = 0;

  // Throws ConfigError on out-of-range fields or when
  // fp_range.max + max_related + 1 > list_size.
  void validate() const;

  // Distinct positive phrases that fit alongside the negative quotas.
  int max_positives() const { return list_size - fp_range.max - max_related; }
};

// A word window cut from a paragraph. Occurrence spans are relative to
// `text`, resolved to a non-overlapping set (leftmost-longest) and capped
// at the strategy's positive-candidate budget.
struct Snippet {
  std::string text;  // original case
  Span window;       // scalar span in the source paragraph text
  std::vector<Occurrence> occurrences;
};

// Picks a window with length uniform in snippet_word_range (clamped to
// the paragraph), uniformly among starts whose window contains at least
// one whole occurrence and no part of any skip span. Returns nullopt
// when no window qualifies (the paragraph is rejected).
std::optional<Snippet> cut_snippet(const ParagraphRecord& record,
                                   std::span<const Span> skip_spans,
                                   const SamplingStrategy& strategy, SplitRng& rng);

struct CorruptionResult {
  std::string corrupted;  // lowercase
  std::vector<Substitution> substitutions;
};

// Substitutes each snippet occurrence with a variant sampled from the
// inventory proportionally to its count. A sampled variant equal to the
// original is a self-replacement: recorded when allowed, otherwise the
// draw is restricted to proper variants (and skipped if there are none).
// Throws DataError when an occurrence key is missing from the inventory.
CorruptionResult corrupt_snippet(const Snippet& snippet, const Inventory& inv,
                                 const SamplingStrategy& strategy, SplitRng& rng);

struct BiasingList {
  std::vector<Candidate> candidates;  // exactly list_size entries
  bool positives_included = false;
};

// Builds the labeled candidate list: positives with probability
// p_correct, a uniform count in fp_range of false positives matching the
// snippet (when available), up to max_related related phrases when
// positives are present, the rest random draws from the global pool;
// deduplicated by text and shuffled.
BiasingList assemble_biasing_list(std::span<const Phrase> positives,
                                  const NegativePools& pools,
                                  std::span<const Phrase> global_pool,
                                  std::string_view corrupted_snippet,
                                  const SamplingStrategy& strategy, SplitRng& rng);

// Assembles the final example; snippets are emitted lowercase. char_tags
// mark each substituted span with the 1-based index of its positive
// candidate, 0 elsewhere; an example without positives has all-zero tags
// and the no-correct-candidate flag.
TrainingExample emit_example(const Snippet& snippet, const CorruptionResult& corruption,
                             const BiasingList& list);

struct SynthesisInputs {
  std::span<const ParagraphRecord> records;
  // Skip spans per record, parallel to `records` (empty = none).
  std::span<const std::vector<Span>> skip_spans;
  const Inventory* inventory = nullptr;
  const NegativePools* pools = nullptr;
  std::span<const Phrase> global_pool;
};

// Generates `count` examples deterministically: the example for
// (paragraph_id, example_index) draws from an rng stream derived from
// (seed, paragraph_id, example_index), so output bits depend only on the
// inputs and the strategy. Output is ordered by (paragraph position,
// example_index). Throws DataError if the corpus cannot yield `count`
// examples.
std::vector<TrainingExample> generate_examples(const SynthesisInputs& inputs,
                                               const SamplingStrategy& strategy,
                                               std::uint64_t count,
                                               int shard_count = 1);

}  // namespace biasgen

#endif  // BIASGEN_SYNTHESIZER_HPP_
