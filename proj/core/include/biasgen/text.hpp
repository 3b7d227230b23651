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

#ifndef BIASGEN_TEXT_HPP_
#define BIASGEN_TEXT_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biasgen {

// Half-open [begin, end) range of Unicode scalar offsets. All span
// arithmetic in this project is over scalars, never bytes, so spans stay
// valid under ASCII-only case changes and survive re-encoding.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
  bool empty() const { return begin >= end; }
  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end;
  }
  bool overlaps(const Span& other) const {
    return begin < other.end && other.begin < end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

// Decodes UTF-8 into Unicode scalars. Returns nullopt on malformed input
// (overlong forms, surrogates, truncated sequences).
std::optional<std::u32string> utf8_decode(std::string_view bytes);

// Decode that throws DataError mentioning `what` on malformed input.
std::u32string utf8_decode_or_throw(std::string_view bytes, std::string_view what);

std::string utf8_encode(std::u32string_view scalars);

// Number of Unicode scalars in a valid UTF-8 string.
std::size_t scalar_length(std::string_view bytes);

// ASCII-only lowercasing; non-ASCII scalars pass through.
char32_t ascii_lower(char32_t c);
std::string ascii_lower_copy(std::string_view text);
std::u32string ascii_lower_copy(std::u32string_view text);

bool is_ascii_digit(char32_t c);
bool is_ascii_lower_alpha(char32_t c);
bool is_ascii_upper_alpha(char32_t c);

// Characters permitted inside a normalized phrase: [a-z0-9' ].
bool is_phrase_char(char32_t c);

// Characters that belong to a word for boundary purposes: [a-z0-9'].
// Space separates words and is deliberately excluded.
bool is_word_char(char32_t c);

// Replaces tabs/newlines/CRs with spaces, collapses space runs, trims.
std::string collapse_whitespace(std::string_view text);

// Splits on single spaces. Assumes single-space-separated input (the
// Phrase normal form); empty input gives an empty vector.
std::vector<std::string_view> split_words(std::string_view text);

// Splits on arbitrary whitespace runs, returning tokens with their scalar
// spans in the original text.
struct Token {
  std::u32string text;
  Span span;
};
std::vector<Token> tokenize_with_spans(const std::u32string& text);

}  // namespace biasgen

#endif  // BIASGEN_TEXT_HPP_
