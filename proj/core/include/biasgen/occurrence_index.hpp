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
// Multi-pattern phrase search over paragraph text: an Aho-Corasick
// automaton over the lowercase phrase alphabet with a word-boundary
// post-check. Reports exactly the spans a naive per-pattern scan with
// boundary checks would report, overlaps included.

#ifndef BIASGEN_OCCURRENCE_INDEX_HPP_
#define BIASGEN_OCCURRENCE_INDEX_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biasgen/corpus_model.hpp"

namespace biasgen {

// Automaton step counts for one scan; transitions is exactly the number
// of scanned scalars (the goto function is fully resolved), output_hops
// the number of match emissions before boundary filtering.
struct ScanStats {
  std::uint64_t transitions = 0;
  std::uint64_t output_hops = 0;
};

class PatternSet {
 public:
  // Builds the automaton over the deduplicated pattern set. Construction
  // is O(total pattern characters). Throws DataError on an empty set.
  static PatternSet build(std::span<const Phrase> patterns);

  std::size_t size() const { return patterns_.size(); }
  const Phrase& pattern(int id) const { return patterns_[static_cast<std::size_t>(id)]; }
  std::span<const Phrase> patterns() const { return patterns_; }

  struct Match {
    int pattern_id;
    Span span;
  };

  // All word-boundary matches over already-lowercased scalars.
  void scan(const std::u32string& lowered, std::vector<Match>& out,
            ScanStats* stats = nullptr) const;

 private:
  // a-z, 0-9, apostrophe, space.
  static constexpr int kAlphabet = 38;
  static int symbol_of(char32_t c);

  struct Node {
    std::int32_t go[kAlphabet];
    std::int32_t fail = 0;
    std::int32_t output_link = -1;  // nearest suffix node that ends a pattern
    std::int32_t pattern_id = -1;
    std::int32_t depth = 0;
  };

  std::vector<Phrase> patterns_;
  std::vector<Node> nodes_;
};

// All word-boundary matches of the pattern set in `text`, sorted by start
// then by descending length. uppercase_start reflects the original text.
std::vector<Occurrence> scan_paragraph(const PatternSet& matcher, std::string_view text,
                                       ScanStats* stats = nullptr);

// One canonical record per paragraph with at least one match.
// paragraph_id is the 0-based position in the corpus stream, so ids join
// back to the input file across pipeline stages.
std::vector<ParagraphRecord> build_keys2paragraph(std::span<const std::string> corpus,
                                                  const PatternSet& matcher,
                                                  int shard_count = 1);

}  // namespace biasgen

#endif  // BIASGEN_OCCURRENCE_INDEX_HPP_
