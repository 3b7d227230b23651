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
// Hard-negative mining: related phrases (similar to a positive phrase
// but distinguishable from it) and false positives (biasing phrases
// accidentally similar to common text n-grams), plus the indexed pools
// the synthesizer samples from.

#ifndef BIASGEN_NEGATIVE_MINER_HPP_
#define BIASGEN_NEGATIVE_MINER_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasgen/corpus_model.hpp"
#include "biasgen/inventory.hpp"

namespace biasgen {

// Consonant-skeleton key for spelling-variant detection: per word, maps
// ph->f, ck->k, c->k, z->s, collapses doubled letters, then drops vowels
// (a e i o u y) and h except word-initially. Deterministic and total.
std::string phonetic_key(const Phrase& phrase);

// Similarity = 1 - edit_distance / max(length); scalar-level, spaces
// included.
double phrase_similarity(const Phrase& a, const Phrase& b);

struct RelatedParams {
  double min_sim = 0.5;
  double max_sim = 0.9;
  // Blocking keys (shared word or character 4-gram) with more members
  // than this are skipped; keeps candidate generation near-linear.
  std::size_t max_block_bucket = 5000;
};

// Emits every ordered pair (key, related) from the pool whose similarity
// lies in [min_sim, max_sim], where the two phrases share a word or a
// character 4-gram. Pairs with equal phonetic keys and similarity above
// max_sim - 0.05 are spelling variants and excluded. Output is sorted by
// (key, related) and independent of the shard count.
std::vector<RelatedPair> mine_related(std::span<const Phrase> pool,
                                      const RelatedParams& params = {},
                                      int shard_count = 1);

struct FalsePositiveParams {
  // A recognized phrase is a candidate n-gram only if every word of it
  // has word IDF below this (common words).
  double commonness_threshold = 3.0;
};

// For every inventory pair whose recognized side is made of common
// words, counts word-boundary corpus occurrences of the recognized
// phrase; each hit supports (ngram = recog, phrase = orig). Pairs with
// orig == recog are excluded. Output sorted by (ngram, phrase).
std::vector<FalsePositivePair> mine_false_positives(const Inventory& inv,
                                                    std::span<const std::string> corpus,
                                                    const IdfTable& idf,
                                                    const FalsePositiveParams& params = {},
                                                    int shard_count = 1);

// Indexed access for the synthesizer. Related candidates are ordered by
// descending similarity then lexicographic; false-positive candidates by
// descending support then lexicographic.
class NegativePools {
 public:
  static NegativePools build(std::vector<RelatedPair> related,
                             std::vector<FalsePositivePair> false_positives);

  std::span<const RelatedPair> related_for(std::string_view key) const;

  // False-positive candidates whose n-gram occurs (word-boundary) in the
  // snippet text.
  std::vector<FalsePositivePair> false_positives_in(std::string_view snippet) const;

  bool empty() const { return related_.empty() && fp_by_ngram_.empty(); }
  std::size_t related_pair_count() const;
  std::size_t false_positive_count() const;

 private:
  std::map<std::string, std::vector<RelatedPair>, std::less<>> related_;
  std::map<std::string, std::vector<FalsePositivePair>, std::less<>> fp_by_ngram_;
  int max_fp_order_ = 0;
};

}  // namespace biasgen

#endif  // BIASGEN_NEGATIVE_MINER_HPP_
