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
// Corpus-level statistical character alignment over (original,
// recognized) phrase pairs: a lexical-translation model with a NULL
// source token, trained by EM from a uniform start, plus per-character
// Viterbi decoding and aligned word n-gram extraction.

#ifndef BIASGEN_CHAR_ALIGN_HPP_
#define BIASGEN_CHAR_ALIGN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "biasgen/corpus_model.hpp"

namespace biasgen {

// Character translation probabilities t(target | source). Characters act
// as alignment tokens, spaces included; source index 0 is the NULL token.
// Rows are normalized: for every source char, probabilities over the
// target vocabulary sum to 1 within 1e-9. Immutable after training.
class TranslationTable {
 public:
  static constexpr char32_t kNullToken = U'\0';

  // Probability of target char given source char (kNullToken for NULL).
  // Unknown characters fall back to the floor, keeping decoding total.
  double prob(char32_t source, char32_t target) const;

  double floor_prob() const { return floor_prob_; }

  std::span<const char32_t> source_vocab() const { return source_vocab_; }
  std::span<const char32_t> target_vocab() const { return target_vocab_; }

  // TSV persistence: source \t target \t prob, with ' ' escaped as `\s`
  // and the NULL token as `\0`.
  void save(const std::string& path) const;
  static TranslationTable load(const std::string& path);

  // Row sums over the target vocabulary, for normalization checks.
  double row_sum(char32_t source) const;

  // Vocabulary positions, -1 when unknown.
  int source_index(char32_t c) const;
  int target_index(char32_t c) const;

 private:
  friend struct TableBuilder;

  std::vector<char32_t> source_vocab_;  // [0] = kNullToken, rest sorted
  std::vector<char32_t> target_vocab_;  // sorted
  std::unordered_map<char32_t, int> source_index_;
  std::unordered_map<char32_t, int> target_index_;
  std::vector<double> probs_;  // row-major [source][target]
  double floor_prob_ = 1e-10;
};

struct TrainResult {
  TranslationTable table;
  // Corpus log-likelihood under the table entering each iteration;
  // non-decreasing within 1e-9.
  std::vector<double> log_likelihoods;
};

// Fixed alignment prior over source positions: NULL always takes
// 1/(l+1) of the mass, the rest is spread over real positions by
// exp(-diagonal_strength * |j/(m-1) - i/(l-1)|), normalized per target
// position. Character corruption is near-monotonic, so favoring the
// diagonal resolves the positional symmetry a bag-of-characters model
// cannot break on its own (a corpus of identical pairs is otherwise a
// fixed point of EM). Strength 0 recovers the uniform textbook model.
inline constexpr double kDefaultDiagonalStrength = 6.0;

// EM training. Pairs are weighted by their counts. Deterministic: fixed
// uniform initialization and fixed shard-merge order make the same corpus
// and iteration count reproduce the same table bits.
TrainResult train_alignment(std::span<const CorruptionPair> pairs, int iterations,
                            int shard_count = 1,
                            double diagonal_strength = kDefaultDiagonalStrength);

// Alignment of one recognized phrase to its original: links[j] is the
// original-char index for recognized char j, or kNullLink.
struct CharAlignment {
  static constexpr int kNullLink = -1;
  std::vector<int> links;

  std::vector<std::pair<int, int>> link_pairs() const;
};

// Per-character argmax decoding. Ties between original positions go to
// the smallest index; NULL wins only when strictly better than every
// real position. With monotonic=true, a DP finds the best link sequence
// whose real links never decrease.
CharAlignment viterbi_align(const CorruptionPair& pair, const TranslationTable& table,
                            bool monotonic = false);

struct SubphraseParams {
  int max_ngram_words = 3;
  double overlap_drop_fraction = 0.5;
};

// Segments the original phrase into contiguous word n-grams (orders
// 1..max_ngram_words) and maps each to the minimal recognized span
// covering the characters linked into it. Segments with an empty span,
// or whose span overlaps a sibling word's span by more than
// overlap_drop_fraction (overlap / shorter span), are dropped. Emitted
// pairs inherit the parent count and carry the subphrase source id.
std::vector<CorruptionPair> extract_subphrases(const CorruptionPair& pair,
                                               const CharAlignment& alignment,
                                               const SubphraseParams& params = {});

}  // namespace biasgen

#endif  // BIASGEN_CHAR_ALIGN_HPP_
