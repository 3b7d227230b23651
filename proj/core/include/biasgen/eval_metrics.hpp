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
// Scoring a corrector against reference transcriptions: word/char error
// rates from a minimal edit alignment, biasing-phrase recall/precision
// over that alignment, and the changed-sentence rate.

#ifndef BIASGEN_EVAL_METRICS_HPP_
#define BIASGEN_EVAL_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasgen/corpus_model.hpp"

namespace biasgen {

struct ErrorCounts {
  std::uint64_t substitutions = 0;
  std::uint64_t insertions = 0;
  std::uint64_t deletions = 0;
  std::uint64_t reference_length = 0;

  std::uint64_t total_errors() const { return substitutions + insertions + deletions; }
  // Error rate as a percentage of the reference length.
  double percent() const {
    return 100.0 * static_cast<double>(total_errors()) /
           static_cast<double>(reference_length);
  }
};

// Minimal word-level edit alignment with unit costs; ties in the
// backtrace prefer match/substitution, then deletion, then insertion.
// Throws DataError on an empty reference.
ErrorCounts word_error_counts(std::string_view reference, std::string_view hypothesis);
double word_error_rate(std::string_view reference, std::string_view hypothesis);

// Character-level variant; spaces count as characters.
ErrorCounts char_error_counts(std::string_view reference, std::string_view hypothesis);
double char_error_rate(std::string_view reference, std::string_view hypothesis);

struct PrecisionRecall {
  double recall = 1.0;
  double precision = 1.0;
  std::uint64_t reference_occurrences = 0;
  std::uint64_t reference_hits = 0;
  std::uint64_t hypothesis_occurrences = 0;
  std::uint64_t hypothesis_hits = 0;
  // Set when the corresponding denominator was zero (value reported 1.0).
  bool recall_zero_denominator = false;
  bool precision_zero_denominator = false;
};

// Occurrences of vocabulary phrases are counted on both sides (word
// n-gram matches over lowercased tokens). A reference occurrence is a
// hit when every one of its tokens is aligned as an exact match to a
// contiguous hypothesis token range, and symmetrically for precision.
// With ignore_identical_sentences, sentence pairs with identical text
// are left out of both denominators.
PrecisionRecall biasing_precision_recall(std::span<const std::string> references,
                                         std::span<const std::string> hypotheses,
                                         std::span<const Phrase> vocab,
                                         bool ignore_identical_sentences = false);

// Percentage of sentence pairs with any textual difference. Throws
// DataError on length mismatch.
double changed_sentence_rate(std::span<const std::string> baseline,
                             std::span<const std::string> corrected);

}  // namespace biasgen

#endif  // BIASGEN_EVAL_METRICS_HPP_
