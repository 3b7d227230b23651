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
// Dictionary-based written-to-spoken text normalization. A greedy
// left-to-right scan replaces the longest matching word n-gram with its
// most frequent spoken form; tokens containing digits or other symbols
// with no dictionary hit are copied verbatim and flagged so snippet
// selection can avoid them.

#ifndef BIASGEN_NORMALIZER_HPP_
#define BIASGEN_NORMALIZER_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "biasgen/text.hpp"

namespace biasgen {

struct NormalizationEntry {
  std::string spoken;
  std::uint64_t frequency = 0;
};

struct NormalizationDict {
  // written word n-gram -> its single most frequent spoken form
  std::unordered_map<std::string, NormalizationEntry> entries;
  int max_order = 0;

  std::size_t size() const { return entries.size(); }
};

// Loads a TSV of (written, spoken, frequency) rows. Duplicate
// (written, spoken) rows are aggregated by summing frequencies before
// per-written selection: highest frequency wins, ties go to the
// lexicographically smallest spoken form.
NormalizationDict load_dictionary(const std::string& path);

struct NormalizedText {
  std::string text;
  // Output spans (scalar offsets) that came from unnormalizable input
  // fragments; non-overlapping, in order.
  std::vector<Span> skip_spans;
};

// Whitespace-tokenized greedy scan. At each position orders
// max_order..1 are tried; the first dictionary hit is replaced and the
// scan continues after it. Leading/trailing punctuation on the edge
// tokens is preserved around the replacement; n-gram matches never span
// internal punctuation. A token with no hit whose core contains a digit
// or symbol is copied verbatim and recorded in skip_spans.
NormalizedText normalize_text(const NormalizationDict& dict, std::string_view text);

}  // namespace biasgen

#endif  // BIASGEN_NORMALIZER_HPP_
