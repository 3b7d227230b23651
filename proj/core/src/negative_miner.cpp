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

#include "biasgen/negative_miner.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "biasgen/error.hpp"
#include "biasgen/io.hpp"
#include "biasgen/occurrence_index.hpp"

namespace biasgen {

namespace {

bool is_vowel_or_h(char c) {
  switch (c) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y': case 'h':
      return true;
    default:
      return false;
  }
}

std::string phonetic_key_word(std::string_view word) {
  // Digraph and single-letter sound merges first.
  std::string mapped;
  mapped.reserve(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i + 1 < word.size() && word[i] == 'p' && word[i + 1] == 'h') {
      mapped.push_back('f');
      ++i;
    } else if (i + 1 < word.size() && word[i] == 'c' && word[i + 1] == 'k') {
      mapped.push_back('k');
      ++i;
    } else if (word[i] == 'c') {
      mapped.push_back('k');
    } else if (word[i] == 'z') {
      mapped.push_back('s');
    } else {
      mapped.push_back(word[i]);
    }
  }
  std::string collapsed;
  for (char c : mapped) {
    if (collapsed.empty() || collapsed.back() != c) collapsed.push_back(c);
  }
  std::string key;
  for (std::size_t i = 0; i < collapsed.size(); ++i) {
    if (i == 0 || !is_vowel_or_h(collapsed[i])) key.push_back(collapsed[i]);
  }
  return key;
}

std::uint64_t edit_distance(const std::u32string& a, const std::u32string& b) {
  std::vector<std::uint64_t> prev(b.size() + 1);
  std::vector<std::uint64_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::uint64_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace

std::string phonetic_key(const Phrase& phrase) {
  std::string key;
  for (auto word : phrase.words()) {
    if (!key.empty()) key.push_back(' ');
    key += phonetic_key_word(word);
  }
  return key;
}

double phrase_similarity(const Phrase& a, const Phrase& b) {
  std::u32string ua = utf8_decode_or_throw(a.text, "phrase");
  std::u32string ub = utf8_decode_or_throw(b.text, "phrase");
  std::size_t longest = std::max(ua.size(), ub.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(ua, ub)) / static_cast<double>(longest);
}

std::vector<RelatedPair> mine_related(std::span<const Phrase> pool,
                                      const RelatedParams& params, int shard_count) {
  if (!(params.min_sim > 0.0 && params.min_sim < params.max_sim && params.max_sim < 1.0)) {
    throw DataError("related-mining similarity bounds must satisfy 0 < min < max < 1");
  }

  // Deduplicate the pool; indices below refer to `phrases`.
  std::vector<Phrase> phrases;
  {
    std::set<std::string> seen;
    for (const auto& p : pool) {
      if (seen.insert(p.text).second) phrases.push_back(p);
    }
  }

  // Blocking: words and character 4-grams (whole text when shorter).
  std::unordered_map<std::string, std::vector<std::uint32_t>> blocks;
  for (std::uint32_t idx = 0; idx < phrases.size(); ++idx) {
    std::set<std::string> keys;
    const std::string& text = phrases[idx].text;
    for (auto word : phrases[idx].words()) keys.insert(std::string(word));
    if (text.size() < 4) {
      keys.insert(text);
    } else {
      for (std::size_t i = 0; i + 4 <= text.size(); ++i) keys.insert(text.substr(i, 4));
    }
    for (auto& key : keys) blocks[key].push_back(idx);
  }

  std::unordered_set<std::uint64_t> candidate_pairs;
  for (const auto& [key, members] : blocks) {
    if (members.size() > params.max_block_bucket) continue;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        std::uint32_t a = std::min(members[i], members[j]);
        std::uint32_t b = std::max(members[i], members[j]);
        candidate_pairs.insert((static_cast<std::uint64_t>(a) << 32) | b);
      }
    }
  }

  std::vector<std::uint64_t> candidates(candidate_pairs.begin(), candidate_pairs.end());
  std::sort(candidates.begin(), candidates.end());

  const double variant_sim_floor = params.max_sim - 0.05;
  int shards = std::max(1, shard_count);
  std::vector<std::vector<RelatedPair>> shard_out(static_cast<std::size_t>(shards));
  parallel_shards(candidates.size(), shards, [&](int shard, std::size_t begin,
                                                 std::size_t end) {
    auto& local = shard_out[static_cast<std::size_t>(shard)];
    for (std::size_t c = begin; c < end; ++c) {
      std::uint64_t packed = candidates[c];
      const Phrase& a = phrases[packed >> 32];
      const Phrase& b = phrases[packed & 0xFFFFFFFFu];
      double sim = phrase_similarity(a, b);
      if (sim < params.min_sim || sim > params.max_sim) continue;
      if (sim > variant_sim_floor && phonetic_key(a) == phonetic_key(b)) continue;
      local.push_back(RelatedPair{a, b, sim});
      local.push_back(RelatedPair{b, a, sim});
    }
  });

  std::vector<RelatedPair> out;
  for (auto& shard : shard_out) {
    out.insert(out.end(), shard.begin(), shard.end());
  }
  std::sort(out.begin(), out.end(), [](const RelatedPair& x, const RelatedPair& y) {
    if (x.key.text != y.key.text) return x.key.text < y.key.text;
    return x.related.text < y.related.text;
  });
  return out;
}

std::vector<FalsePositivePair> mine_false_positives(const Inventory& inv,
                                                    std::span<const std::string> corpus,
                                                    const IdfTable& idf,
                                                    const FalsePositiveParams& params,
                                                    int shard_count) {
  // Candidate n-grams: recognized phrases made entirely of common words.
  auto is_common = [&](const Phrase& recog) {
    for (auto word : recog.words()) {
      auto score = idf.word_idf(word);
      if (!score || *score >= params.commonness_threshold) return false;
    }
    return true;
  };

  std::map<std::string, std::set<std::string>> origs_by_recog;
  for (const auto& row : inv.rows()) {
    if (row.orig.text == row.recog.text) continue;
    if (is_common(row.recog)) origs_by_recog[row.recog.text].insert(row.orig.text);
  }
  if (origs_by_recog.empty() || corpus.empty()) return {};

  std::vector<Phrase> patterns;
  patterns.reserve(origs_by_recog.size());
  for (const auto& [recog, origs] : origs_by_recog) patterns.push_back(Phrase::parse(recog));
  PatternSet matcher = PatternSet::build(patterns);

  int shards = std::max(1, shard_count);
  std::vector<std::vector<std::uint64_t>> shard_hits(
      static_cast<std::size_t>(shards), std::vector<std::uint64_t>(matcher.size(), 0));
  parallel_shards(corpus.size(), shards, [&](int shard, std::size_t begin,
                                             std::size_t end) {
    auto& hits = shard_hits[static_cast<std::size_t>(shard)];
    std::vector<PatternSet::Match> matches;
    for (std::size_t p = begin; p < end; ++p) {
      std::u32string lowered =
          ascii_lower_copy(utf8_decode_or_throw(corpus[p], "paragraph"));
      matcher.scan(lowered, matches);
      for (const auto& match : matches) {
        ++hits[static_cast<std::size_t>(match.pattern_id)];
      }
    }
  });
  for (int s = 1; s < shards; ++s) {
    for (std::size_t id = 0; id < matcher.size(); ++id) {
      shard_hits[0][id] += shard_hits[static_cast<std::size_t>(s)][id];
    }
  }

  std::vector<FalsePositivePair> out;
  for (std::size_t id = 0; id < matcher.size(); ++id) {
    std::uint64_t support = shard_hits[0][id];
    if (support == 0) continue;
    const Phrase& ngram = matcher.pattern(static_cast<int>(id));
    for (const auto& orig : origs_by_recog.at(ngram.text)) {
      out.push_back(FalsePositivePair{ngram, Phrase::parse(orig), support});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const FalsePositivePair& a, const FalsePositivePair& b) {
              if (a.ngram.text != b.ngram.text) return a.ngram.text < b.ngram.text;
              return a.phrase.text < b.phrase.text;
            });
  return out;
}

NegativePools NegativePools::build(std::vector<RelatedPair> related,
                                   std::vector<FalsePositivePair> false_positives) {
  NegativePools pools;
  for (auto& pair : related) {
    pools.related_[pair.key.text].push_back(std::move(pair));
  }
  for (auto& [key, list] : pools.related_) {
    std::sort(list.begin(), list.end(), [](const RelatedPair& a, const RelatedPair& b) {
      if (a.similarity != b.similarity) return a.similarity > b.similarity;
      return a.related.text < b.related.text;
    });
  }
  for (auto& pair : false_positives) {
    int order = pair.ngram.word_count;
    pools.max_fp_order_ = std::max(pools.max_fp_order_, order);
    pools.fp_by_ngram_[pair.ngram.text].push_back(std::move(pair));
  }
  for (auto& [key, list] : pools.fp_by_ngram_) {
    std::sort(list.begin(), list.end(),
              [](const FalsePositivePair& a, const FalsePositivePair& b) {
                if (a.support != b.support) return a.support > b.support;
                return a.phrase.text < b.phrase.text;
              });
  }
  return pools;
}

std::span<const RelatedPair> NegativePools::related_for(std::string_view key) const {
  auto it = related_.find(key);
  if (it == related_.end()) return {};
  return it->second;
}

std::vector<FalsePositivePair> NegativePools::false_positives_in(
    std::string_view snippet) const {
  std::vector<FalsePositivePair> out;
  if (fp_by_ngram_.empty()) return out;

  std::u32string lowered = ascii_lower_copy(utf8_decode_or_throw(snippet, "snippet"));
  // Maximal word-character runs; an n-gram occurs iff the raw slice from
  // run a to run a+n-1 equals it (single spaces between runs).
  std::vector<Span> runs;
  std::size_t i = 0;
  while (i < lowered.size()) {
    if (!is_word_char(lowered[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    while (i < lowered.size() && is_word_char(lowered[i])) ++i;
    runs.push_back(Span{begin, i});
  }

  std::set<std::string> seen;
  for (std::size_t a = 0; a < runs.size(); ++a) {
    for (int order = 1; order <= max_fp_order_; ++order) {
      std::size_t b = a + static_cast<std::size_t>(order) - 1;
      if (b >= runs.size()) break;
      std::u32string slice =
          lowered.substr(runs[a].begin, runs[b].end - runs[a].begin);
      std::string key = utf8_encode(slice);
      auto it = fp_by_ngram_.find(key);
      if (it == fp_by_ngram_.end()) continue;
      if (!seen.insert(key).second) continue;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  std::sort(out.begin(), out.end(),
            [](const FalsePositivePair& a, const FalsePositivePair& b) {
              if (a.support != b.support) return a.support > b.support;
              if (a.phrase.text != b.phrase.text) return a.phrase.text < b.phrase.text;
              return a.ngram.text < b.ngram.text;
            });
  return out;
}

std::size_t NegativePools::related_pair_count() const {
  std::size_t n = 0;
  for (const auto& [key, list] : related_) n += list.size();
  return n;
}

std::size_t NegativePools::false_positive_count() const {
  std::size_t n = 0;
  for (const auto& [key, list] : fp_by_ngram_) n += list.size();
  return n;
}

}  // namespace biasgen
