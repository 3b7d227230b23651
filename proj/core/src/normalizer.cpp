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

#include "biasgen/normalizer.hpp"

#include <algorithm>
#include <map>

#include "biasgen/corpus_model.hpp"
#include "biasgen/error.hpp"
#include "biasgen/io.hpp"

namespace biasgen {

namespace {

bool is_edge_punct(char32_t c) {
  switch (c) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?':
    case U'"': case U'(': case U')': case U'[': case U']':
      return true;
    default:
      return false;
  }
}

// A core character the dictionary could never cover on its own: digits
// and ASCII symbols other than letters, apostrophes and hyphens.
bool is_unnormalizable_char(char32_t c) {
  if (is_ascii_digit(c)) return true;
  if (c >= 0x80) return false;
  if (is_ascii_lower_alpha(ascii_lower(c))) return false;
  return c != U'\'' && c != U'-';
}

struct TokenParts {
  std::u32string lead;   // leading punctuation
  std::u32string core;
  std::u32string trail;  // trailing punctuation
};

TokenParts split_token(const std::u32string& token) {
  std::size_t begin = 0;
  std::size_t end = token.size();
  while (begin < end && is_edge_punct(token[begin])) ++begin;
  while (end > begin && is_edge_punct(token[end - 1])) --end;
  return TokenParts{token.substr(0, begin), token.substr(begin, end - begin),
                    token.substr(end)};
}

}  // namespace

NormalizationDict load_dictionary(const std::string& path) {
  // (written, spoken) -> summed frequency
  std::map<std::pair<std::string, std::string>, std::uint64_t> rows;
  for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    auto fields = split_tsv(line);
    if (fields.size() != 3) {
      throw SchemaError(path, line_no, "expected 3 columns, got " +
                                           std::to_string(fields.size()));
    }
    std::string written = collapse_whitespace(fields[0]);
    if (written.empty()) throw SchemaError(path, line_no, "empty written form");
    std::uint64_t freq = 0;
    if (!parse_uint64(fields[2], freq)) {
      throw SchemaError(path, line_no, "invalid frequency '" + std::string(fields[2]) + "'");
    }
    try {
      rows[{std::move(written), Phrase::parse(fields[1]).text}] += freq;
    } catch (const DataError& e) {
      throw SchemaError(path, line_no, e.what());
    }
  });

  NormalizationDict dict;
  for (const auto& [key, freq] : rows) {
    const auto& [written, spoken] = key;
    auto it = dict.entries.find(written);
    if (it == dict.entries.end()) {
      dict.entries.emplace(written, NormalizationEntry{spoken, freq});
    } else if (freq > it->second.frequency ||
               (freq == it->second.frequency && spoken < it->second.spoken)) {
      it->second = NormalizationEntry{spoken, freq};
    }
    int order = 1 + static_cast<int>(std::count(written.begin(), written.end(), ' '));
    dict.max_order = std::max(dict.max_order, order);
  }
  return dict;
}

NormalizedText normalize_text(const NormalizationDict& dict, std::string_view text) {
  std::u32string decoded = utf8_decode_or_throw(text, "normalizer input");
  auto tokens = tokenize_with_spans(decoded);

  std::vector<TokenParts> parts;
  parts.reserve(tokens.size());
  for (const auto& token : tokens) parts.push_back(split_token(token.text));

  // N-gram lookup keys are built from token cores; matches may not span
  // internal punctuation and every covered core must be non-empty.
  auto ngram_key = [&](std::size_t i, std::size_t order) -> std::string {
    std::u32string key;
    for (std::size_t j = i; j < i + order; ++j) {
      if (parts[j].core.empty()) return {};
      if (j > i && (!parts[j - 1].trail.empty() || !parts[j].lead.empty())) return {};
      if (j > i) key.push_back(U' ');
      key += parts[j].core;
    }
    return utf8_encode(key);
  };

  NormalizedText result;
  std::u32string out;
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!out.empty()) out.push_back(U' ');

    std::size_t max_order = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(dict.max_order, 1)), tokens.size() - i);
    bool replaced = false;
    for (std::size_t order = max_order; order >= 1 && !replaced; --order) {
      std::string key = ngram_key(i, order);
      if (key.empty()) continue;
      auto it = dict.entries.find(key);
      if (it == dict.entries.end()) continue;
      out += parts[i].lead;
      out += utf8_decode_or_throw(it->second.spoken, "spoken form");
      out += parts[i + order - 1].trail;
      i += order;
      replaced = true;
    }
    if (replaced) continue;

    std::size_t token_begin = out.size();
    out += tokens[i].text;
    bool skip = false;
    for (char32_t c : parts[i].core) {
      if (is_unnormalizable_char(c)) skip = true;
    }
    if (skip) result.skip_spans.push_back(Span{token_begin, out.size()});
    ++i;
  }

  result.text = utf8_encode(out);
  return result;
}

}  // namespace biasgen
