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

#include "biasgen/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "biasgen/error.hpp"
#include "biasgen/io.hpp"
#include "biasgen/occurrence_index.hpp"

namespace biasgen {

Inventory Inventory::from_pairs(std::span<const CorruptionPair> rows) {
  // (orig, recog, source) -> summed count
  std::map<std::tuple<std::string, std::string, std::string>, std::uint64_t> by_row;
  for (const auto& row : rows) {
    if (row.count == 0) throw DataError("zero-count inventory row");
    by_row[{row.orig.text, row.recog.text, row.source_id}] += row.count;
  }

  Inventory inv;
  inv.rows_.reserve(by_row.size());
  std::map<std::string, std::map<std::string, std::uint64_t>> totals;
  for (const auto& [key, count] : by_row) {
    const auto& [orig, recog, source] = key;
    inv.rows_.push_back(
        CorruptionPair{Phrase::parse(orig), Phrase::parse(recog), count, source});
    totals[orig][recog] += count;
  }
  for (const auto& [orig, recogs] : totals) {
    auto& variants = inv.index_[orig];
    variants.reserve(recogs.size());
    for (const auto& [recog, count] : recogs) {
      variants.push_back(Variant{Phrase::parse(recog), count});
    }
    std::sort(variants.begin(), variants.end(), [](const Variant& a, const Variant& b) {
      if (a.count != b.count) return a.count > b.count;
      return a.recog.text < b.recog.text;
    });
  }
  return inv;
}

const std::vector<Inventory::Variant>* Inventory::variants(std::string_view orig) const {
  auto it = index_.find(std::string(orig));
  return it == index_.end() ? nullptr : &it->second;
}

std::vector<Phrase> Inventory::orig_phrases() const {
  std::vector<Phrase> out;
  out.reserve(index_.size());
  for (const auto& [orig, variants] : index_) out.push_back(Phrase::parse(orig));
  return out;
}

std::vector<Phrase> Inventory::all_phrases() const {
  std::set<std::string> texts;
  for (const auto& row : rows_) {
    texts.insert(row.orig.text);
    texts.insert(row.recog.text);
  }
  std::vector<Phrase> out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(Phrase::parse(text));
  return out;
}

Inventory merge_sources(std::span<const std::vector<CorruptionPair>> streams) {
  std::vector<CorruptionPair> all;
  for (const auto& stream : streams) {
    std::set<std::tuple<std::string_view, std::string_view, std::string_view>> seen;
    for (const auto& row : stream) {
      if (!seen.insert({row.orig.text, row.recog.text, row.source_id}).second) {
        throw DataError("duplicate (orig, recog, source) within one stream: " +
                        row.orig.text + " / " + row.recog.text + " / " + row.source_id);
      }
      all.push_back(row);
    }
  }
  return Inventory::from_pairs(all);
}

void write_case_stats(const std::string& path, const CaseStats& stats) {
  std::map<std::string_view, CaseCounts> sorted(stats.begin(), stats.end());
  LineWriter writer(path);
  for (const auto& [phrase, counts] : sorted) {
    writer.write_line(std::string(phrase) + "\t" + std::to_string(counts.occurrences) +
                      "\t" + std::to_string(counts.uppercase));
  }
  writer.close();
}

CaseStats read_case_stats(const std::string& path) {
  CaseStats stats;
  for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    auto fields = split_tsv(line);
    CaseCounts counts;
    if (fields.size() != 3 || !parse_uint64(fields[1], counts.occurrences) ||
        !parse_uint64(fields[2], counts.uppercase)) {
      throw SchemaError(path, line_no, "malformed case-stats row");
    }
    stats.emplace(std::string(fields[0]), counts);
  });
  return stats;
}

IdfTable compute_idf(std::span<const std::string> paragraphs,
                     std::span<const Phrase> phrases, int shard_count,
                     CaseStats* case_stats) {
  if (paragraphs.empty()) throw DataError("cannot compute IDF over an empty corpus");
  if (phrases.empty()) throw DataError("cannot compute IDF for an empty phrase set");

  // One automaton over phrases and their words; a pattern can be both.
  std::set<std::string> phrase_texts;
  std::set<std::string> word_texts;
  for (const auto& phrase : phrases) {
    phrase_texts.insert(phrase.text);
    for (auto word : phrase.words()) word_texts.insert(std::string(word));
  }
  std::vector<Phrase> patterns;
  {
    std::set<std::string> all(phrase_texts);
    all.insert(word_texts.begin(), word_texts.end());
    patterns.reserve(all.size());
    for (const auto& text : all) patterns.push_back(Phrase::parse(text));
  }
  PatternSet matcher = PatternSet::build(patterns);

  std::vector<bool> is_phrase(matcher.size()), is_word(matcher.size());
  for (std::size_t id = 0; id < matcher.size(); ++id) {
    const auto& text = matcher.pattern(static_cast<int>(id)).text;
    is_phrase[id] = phrase_texts.contains(text);
    is_word[id] = word_texts.contains(text);
  }

  struct ShardCounts {
    std::vector<std::uint64_t> phrase_df;
    std::vector<std::uint64_t> word_df;
    std::vector<std::uint64_t> occurrences;
    std::vector<std::uint64_t> uppercase;
  };
  int shards = std::max(1, shard_count);
  std::vector<ShardCounts> shard_counts(static_cast<std::size_t>(shards));
  for (auto& counts : shard_counts) {
    counts.phrase_df.assign(matcher.size(), 0);
    counts.word_df.assign(matcher.size(), 0);
    counts.occurrences.assign(matcher.size(), 0);
    counts.uppercase.assign(matcher.size(), 0);
  }

  parallel_shards(paragraphs.size(), shards, [&](int shard, std::size_t begin,
                                                 std::size_t end) {
    auto& counts = shard_counts[static_cast<std::size_t>(shard)];
    std::vector<PatternSet::Match> matches;
    std::vector<bool> seen(matcher.size());
    for (std::size_t p = begin; p < end; ++p) {
      std::u32string original = utf8_decode_or_throw(paragraphs[p], "paragraph");
      std::u32string lowered = ascii_lower_copy(original);
      matcher.scan(lowered, matches);
      std::fill(seen.begin(), seen.end(), false);
      for (const auto& match : matches) {
        auto id = static_cast<std::size_t>(match.pattern_id);
        if (!seen[id]) {
          seen[id] = true;
          if (is_phrase[id]) ++counts.phrase_df[id];
          if (is_word[id]) ++counts.word_df[id];
        }
        if (is_phrase[id]) {
          ++counts.occurrences[id];
          if (is_ascii_upper_alpha(original[match.span.begin])) ++counts.uppercase[id];
        }
      }
    }
  });

  for (int s = 1; s < shards; ++s) {
    auto& merged = shard_counts[0];
    const auto& part = shard_counts[static_cast<std::size_t>(s)];
    for (std::size_t id = 0; id < matcher.size(); ++id) {
      merged.phrase_df[id] += part.phrase_df[id];
      merged.word_df[id] += part.word_df[id];
      merged.occurrences[id] += part.occurrences[id];
      merged.uppercase[id] += part.uppercase[id];
    }
  }

  const auto& counts = shard_counts[0];
  IdfTable table;
  table.doc_count = paragraphs.size();
  double total = static_cast<double>(paragraphs.size());
  for (std::size_t id = 0; id < matcher.size(); ++id) {
    const auto& text = matcher.pattern(static_cast<int>(id)).text;
    if (is_phrase[id] && counts.phrase_df[id] > 0) {
      table.scores.emplace(text,
                           std::log(total / static_cast<double>(counts.phrase_df[id])));
    }
    if (is_word[id] && counts.word_df[id] > 0) {
      table.word_scores.emplace(text,
                                std::log(total / static_cast<double>(counts.word_df[id])));
    }
    if (case_stats != nullptr && is_phrase[id] && counts.occurrences[id] > 0) {
      (*case_stats)[text] = CaseCounts{counts.occurrences[id], counts.uppercase[id]};
    }
  }
  return table;
}

Inventory filter_keys(const Inventory& inv, const IdfTable& idf,
                      const FilterThresholds& thresholds, const CaseStats* case_stats) {
  if (thresholds.uppercase_relax_factor <= 0.0 || thresholds.uppercase_relax_factor > 1.0) {
    throw DataError("uppercase_relax_factor must be in (0, 1]");
  }

  auto keep_orig = [&](const std::string& orig) {
    double relax = 1.0;
    if (case_stats != nullptr) {
      auto it = case_stats->find(orig);
      if (it != case_stats->end() && it->second.occurrences > 0 &&
          2 * it->second.uppercase > it->second.occurrences) {
        relax = thresholds.uppercase_relax_factor;
      }
    }
    if (auto score = idf.phrase_idf(orig);
        score && *score < thresholds.phrase_min_idf * relax) {
      return false;
    }
    auto words = split_words(orig);
    for (std::size_t edge : {std::size_t{0}, words.size() - 1}) {
      if (auto score = idf.word_idf(words[edge]);
          score && *score < thresholds.edge_word_min_idf * relax) {
        return false;
      }
    }
    return true;
  };

  std::vector<CorruptionPair> kept;
  kept.reserve(inv.rows().size());
  for (const auto& row : inv.rows()) {
    if (keep_orig(row.orig.text)) kept.push_back(row);
  }
  return Inventory::from_pairs(kept);
}

}  // namespace biasgen
