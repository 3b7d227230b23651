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

#include "biasgen/occurrence_index.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "biasgen/error.hpp"
#include "biasgen/io.hpp"

namespace biasgen {

int PatternSet::symbol_of(char32_t c) {
  if (c >= U'a' && c <= U'z') return static_cast<int>(c - U'a');
  if (c >= U'0' && c <= U'9') return 26 + static_cast<int>(c - U'0');
  if (c == U'\'') return 36;
  if (c == U' ') return 37;
  return -1;
}

PatternSet PatternSet::build(std::span<const Phrase> patterns) {
  if (patterns.empty()) throw DataError("cannot build a matcher over an empty pattern set");

  std::set<std::string> unique;
  for (const auto& p : patterns) unique.insert(p.text);

  PatternSet set;
  set.patterns_.reserve(unique.size());
  for (const auto& text : unique) set.patterns_.push_back(Phrase::parse(text));

  set.nodes_.emplace_back();
  auto& nodes = set.nodes_;
  std::fill(std::begin(nodes[0].go), std::end(nodes[0].go), -1);

  for (std::size_t id = 0; id < set.patterns_.size(); ++id) {
    std::int32_t state = 0;
    for (char c : set.patterns_[id].text) {
      int sym = symbol_of(static_cast<char32_t>(static_cast<unsigned char>(c)));
      if (nodes[static_cast<std::size_t>(state)].go[sym] == -1) {
        Node node;
        std::fill(std::begin(node.go), std::end(node.go), -1);
        node.depth = nodes[static_cast<std::size_t>(state)].depth + 1;
        nodes[static_cast<std::size_t>(state)].go[sym] =
            static_cast<std::int32_t>(nodes.size());
        nodes.push_back(node);
      }
      state = nodes[static_cast<std::size_t>(state)].go[sym];
    }
    nodes[static_cast<std::size_t>(state)].pattern_id = static_cast<std::int32_t>(id);
  }

  // BFS: fail links, output links, and a fully resolved goto function.
  std::deque<std::int32_t> queue;
  for (int sym = 0; sym < kAlphabet; ++sym) {
    std::int32_t next = nodes[0].go[sym];
    if (next == -1) {
      nodes[0].go[sym] = 0;
    } else {
      nodes[static_cast<std::size_t>(next)].fail = 0;
      queue.push_back(next);
    }
  }
  while (!queue.empty()) {
    std::int32_t u = queue.front();
    queue.pop_front();
    Node& node = nodes[static_cast<std::size_t>(u)];
    const Node& fail_node = nodes[static_cast<std::size_t>(node.fail)];
    node.output_link =
        fail_node.pattern_id >= 0 ? node.fail : fail_node.output_link;
    for (int sym = 0; sym < kAlphabet; ++sym) {
      std::int32_t next = node.go[sym];
      if (next == -1) {
        node.go[sym] = fail_node.go[sym];
      } else {
        nodes[static_cast<std::size_t>(next)].fail = fail_node.go[sym];
        queue.push_back(next);
      }
    }
  }
  return set;
}

void PatternSet::scan(const std::u32string& lowered, std::vector<Match>& out,
                      ScanStats* stats) const {
  out.clear();
  auto word_char_at = [&](std::size_t pos) {
    return pos < lowered.size() && is_word_char(lowered[pos]);
  };

  std::int32_t state = 0;
  for (std::size_t pos = 0; pos < lowered.size(); ++pos) {
    int sym = symbol_of(lowered[pos]);
    if (sym < 0) {
      state = 0;  // outside the pattern alphabet, nothing can span it
    } else {
      state = nodes_[static_cast<std::size_t>(state)].go[sym];
    }
    if (stats != nullptr) ++stats->transitions;

    for (std::int32_t v = state; v != -1;
         v = nodes_[static_cast<std::size_t>(v)].output_link) {
      const Node& node = nodes_[static_cast<std::size_t>(v)];
      if (node.pattern_id < 0) continue;
      if (stats != nullptr) ++stats->output_hops;
      std::size_t end = pos + 1;
      std::size_t begin = end - static_cast<std::size_t>(node.depth);
      bool left_ok = begin == 0 || !is_word_char(lowered[begin - 1]);
      bool right_ok = !word_char_at(end);
      if (left_ok && right_ok) {
        out.push_back(Match{node.pattern_id, Span{begin, end}});
      }
    }
  }
}

std::vector<Occurrence> scan_paragraph(const PatternSet& matcher, std::string_view text,
                                       ScanStats* stats) {
  std::u32string original = utf8_decode_or_throw(text, "paragraph text");
  std::u32string lowered = ascii_lower_copy(original);

  std::vector<PatternSet::Match> matches;
  matcher.scan(lowered, matches, stats);

  std::vector<Occurrence> out;
  out.reserve(matches.size());
  for (const auto& match : matches) {
    out.push_back(Occurrence{matcher.pattern(match.pattern_id), match.span,
                             is_ascii_upper_alpha(original[match.span.begin])});
  }
  std::sort(out.begin(), out.end(), [](const Occurrence& a, const Occurrence& b) {
    if (a.span.begin != b.span.begin) return a.span.begin < b.span.begin;
    if (a.span.length() != b.span.length()) return a.span.length() > b.span.length();
    return a.key.text < b.key.text;
  });
  return out;
}

std::vector<ParagraphRecord> build_keys2paragraph(std::span<const std::string> corpus,
                                                  const PatternSet& matcher,
                                                  int shard_count) {
  std::vector<std::vector<ParagraphRecord>> shard_records(
      static_cast<std::size_t>(std::max(1, shard_count)));
  parallel_shards(corpus.size(), std::max(1, shard_count),
                  [&](int shard, std::size_t begin, std::size_t end) {
                    auto& local = shard_records[static_cast<std::size_t>(shard)];
                    for (std::size_t i = begin; i < end; ++i) {
                      std::string text = collapse_whitespace(corpus[i]);
                      auto occurrences = scan_paragraph(matcher, text);
                      if (occurrences.empty()) continue;
                      ParagraphRecord rec;
                      rec.paragraph_id = static_cast<std::int64_t>(i);
                      rec.text = std::move(text);
                      rec.occurrences = std::move(occurrences);
                      local.push_back(std::move(rec));
                    }
                  });

  std::vector<ParagraphRecord> records;
  for (auto& shard : shard_records) {
    for (auto& rec : shard) records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace biasgen
