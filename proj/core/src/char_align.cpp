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

#include "biasgen/char_align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "biasgen/error.hpp"
#include "biasgen/io.hpp"

namespace biasgen {

namespace {

std::string escape_align_char(char32_t c) {
  if (c == TranslationTable::kNullToken) return "\\0";
  if (c == U' ') return "\\s";
  if (c == U'\\') return "\\\\";
  return utf8_encode(std::u32string(1, c));
}

char32_t unescape_align_char(std::string_view field) {
  if (field == "\\0") return TranslationTable::kNullToken;
  if (field == "\\s") return U' ';
  if (field == "\\\\") return U'\\';
  auto decoded = utf8_decode(field);
  if (!decoded || decoded->size() != 1) {
    throw DataError("invalid escaped character '" + std::string(field) + "'");
  }
  return (*decoded)[0];
}

struct DecodedPair {
  std::u32string orig;
  std::u32string recog;
  double weight;
};

std::vector<DecodedPair> decode_pairs(std::span<const CorruptionPair> pairs) {
  std::vector<DecodedPair> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    out.push_back(DecodedPair{utf8_decode_or_throw(pair.orig.text, "orig phrase"),
                              utf8_decode_or_throw(pair.recog.text, "recog phrase"),
                              static_cast<double>(pair.count)});
  }
  return out;
}

}  // namespace

// Builds dense tables with a fixed vocab order: NULL first, then sorted
// source chars; sorted target chars. The fixed order is what makes
// training bit-deterministic.
struct TableBuilder {
  static TranslationTable make(const std::set<char32_t>& source_chars,
                               const std::set<char32_t>& target_chars) {
    TranslationTable t;
    t.source_vocab_.push_back(TranslationTable::kNullToken);
    t.source_vocab_.insert(t.source_vocab_.end(), source_chars.begin(), source_chars.end());
    t.target_vocab_.assign(target_chars.begin(), target_chars.end());
    for (std::size_t i = 0; i < t.source_vocab_.size(); ++i) {
      t.source_index_.emplace(t.source_vocab_[i], static_cast<int>(i));
    }
    for (std::size_t i = 0; i < t.target_vocab_.size(); ++i) {
      t.target_index_.emplace(t.target_vocab_[i], static_cast<int>(i));
    }
    double uniform = 1.0 / static_cast<double>(t.target_vocab_.size());
    t.probs_.assign(t.source_vocab_.size() * t.target_vocab_.size(), uniform);
    return t;
  }

  static std::vector<double>& probs(TranslationTable& t) { return t.probs_; }
};

int TranslationTable::source_index(char32_t c) const {
  auto it = source_index_.find(c);
  return it == source_index_.end() ? -1 : it->second;
}

int TranslationTable::target_index(char32_t c) const {
  auto it = target_index_.find(c);
  return it == target_index_.end() ? -1 : it->second;
}

double TranslationTable::prob(char32_t source, char32_t target) const {
  int si = source_index(source);
  int ti = target_index(target);
  if (si < 0 || ti < 0) return floor_prob_;
  double p = probs_[static_cast<std::size_t>(si) * target_vocab_.size() +
                    static_cast<std::size_t>(ti)];
  return std::max(p, floor_prob_);
}

double TranslationTable::row_sum(char32_t source) const {
  int si = source_index(source);
  if (si < 0) return 0.0;
  double sum = 0.0;
  for (std::size_t ti = 0; ti < target_vocab_.size(); ++ti) {
    sum += probs_[static_cast<std::size_t>(si) * target_vocab_.size() + ti];
  }
  return sum;
}

void TranslationTable::save(const std::string& path) const {
  LineWriter writer(path);
  for (std::size_t si = 0; si < source_vocab_.size(); ++si) {
    for (std::size_t ti = 0; ti < target_vocab_.size(); ++ti) {
      writer.write_line(escape_align_char(source_vocab_[si]) + "\t" +
                        escape_align_char(target_vocab_[ti]) + "\t" +
                        format_double(probs_[si * target_vocab_.size() + ti]));
    }
  }
  writer.close();
}

TranslationTable TranslationTable::load(const std::string& path) {
  std::set<char32_t> sources;
  std::set<char32_t> targets;
  std::vector<std::tuple<char32_t, char32_t, double>> rows;
  for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    try {
      auto fields = split_tsv(line);
      if (fields.size() != 3) throw DataError("expected 3 columns");
      char32_t src = unescape_align_char(fields[0]);
      char32_t tgt = unescape_align_char(fields[1]);
      bool ok = false;
      double p = parse_double(fields[2], ok);
      if (!ok || p < 0.0) throw DataError("invalid probability");
      if (src != kNullToken) sources.insert(src);
      targets.insert(tgt);
      rows.emplace_back(src, tgt, p);
    } catch (const DataError& e) {
      throw SchemaError(path, line_no, e.what());
    }
  });
  if (rows.empty()) throw SchemaError(path, 0, "empty alignment table");
  TranslationTable t = TableBuilder::make(sources, targets);
  auto& probs = TableBuilder::probs(t);
  std::fill(probs.begin(), probs.end(), 0.0);
  for (const auto& [src, tgt, p] : rows) {
    probs[static_cast<std::size_t>(t.source_index(src)) * t.target_vocab_.size() +
          static_cast<std::size_t>(t.target_index(tgt))] = p;
  }
  return t;
}

// Prior over source choices (index 0 = NULL) for target position j.
static std::vector<double> alignment_prior(std::size_t orig_len, std::size_t recog_len,
                                           std::size_t j, double diagonal_strength) {
  std::vector<double> prior(orig_len + 1);
  prior[0] = 1.0 / static_cast<double>(orig_len + 1);
  double jr = recog_len > 1 ? static_cast<double>(j) / static_cast<double>(recog_len - 1)
                            : 0.5;
  double z = 0.0;
  for (std::size_t i = 0; i < orig_len; ++i) {
    double ir = orig_len > 1
                    ? static_cast<double>(i) / static_cast<double>(orig_len - 1)
                    : 0.5;
    prior[i + 1] = std::exp(-diagonal_strength * std::fabs(jr - ir));
    z += prior[i + 1];
  }
  double real_share = static_cast<double>(orig_len) / static_cast<double>(orig_len + 1);
  for (std::size_t i = 0; i < orig_len; ++i) prior[i + 1] *= real_share / z;
  return prior;
}

TrainResult train_alignment(std::span<const CorruptionPair> pairs, int iterations,
                            int shard_count, double diagonal_strength) {
  if (pairs.empty()) throw DataError("cannot train alignment on an empty corpus");
  if (iterations < 1) throw DataError("iterations must be >= 1");
  if (diagonal_strength < 0.0) throw DataError("diagonal_strength must be >= 0");

  auto decoded = decode_pairs(pairs);
  std::set<char32_t> source_chars;
  std::set<char32_t> target_chars;
  for (const auto& pair : decoded) {
    source_chars.insert(pair.orig.begin(), pair.orig.end());
    target_chars.insert(pair.recog.begin(), pair.recog.end());
  }

  TranslationTable table = TableBuilder::make(source_chars, target_chars);
  const std::size_t tgt_count = table.target_vocab().size();
  const std::size_t src_count = table.source_vocab().size();

  std::vector<double> log_likelihoods;
  log_likelihoods.reserve(static_cast<std::size_t>(iterations));

  for (int iter = 0; iter < iterations; ++iter) {
    int shards = std::max(1, shard_count);
    std::vector<std::vector<double>> shard_counts(
        static_cast<std::size_t>(shards),
        std::vector<double>(src_count * tgt_count, 0.0));
    std::vector<double> shard_ll(static_cast<std::size_t>(shards), 0.0);

    parallel_shards(decoded.size(), shards, [&](int shard, std::size_t begin,
                                                std::size_t end) {
      auto& counts = shard_counts[static_cast<std::size_t>(shard)];
      double ll = 0.0;
      std::vector<double> posterior;
      for (std::size_t p = begin; p < end; ++p) {
        const auto& pair = decoded[p];
        const std::size_t l = pair.orig.size();
        posterior.resize(l + 1);
        double pair_ll = 0.0;
        for (std::size_t j = 0; j < pair.recog.size(); ++j) {
          char32_t f = pair.recog[j];
          auto prior = alignment_prior(l, pair.recog.size(), j, diagonal_strength);
          double denom = 0.0;
          posterior[0] = prior[0] * table.prob(TranslationTable::kNullToken, f);
          denom += posterior[0];
          for (std::size_t i = 0; i < l; ++i) {
            posterior[i + 1] = prior[i + 1] * table.prob(pair.orig[i], f);
            denom += posterior[i + 1];
          }
          pair_ll += std::log(denom);
          int ti = table.target_index(f);
          double scale = pair.weight / denom;
          counts[static_cast<std::size_t>(ti)] += posterior[0] * scale;
          for (std::size_t i = 0; i < l; ++i) {
            int si = table.source_index(pair.orig[i]);
            counts[static_cast<std::size_t>(si) * tgt_count +
                   static_cast<std::size_t>(ti)] += posterior[i + 1] * scale;
          }
        }
        ll += pair.weight * pair_ll;
      }
      shard_ll[static_cast<std::size_t>(shard)] = ll;
    });

    double ll = 0.0;
    for (double part : shard_ll) ll += part;
    log_likelihoods.push_back(ll);

    // Merge in shard order, then normalize rows.
    auto& merged = shard_counts[0];
    for (int s = 1; s < shards; ++s) {
      const auto& part = shard_counts[static_cast<std::size_t>(s)];
      for (std::size_t i = 0; i < merged.size(); ++i) merged[i] += part[i];
    }
    auto& probs = TableBuilder::probs(table);
    for (std::size_t si = 0; si < src_count; ++si) {
      double total = 0.0;
      for (std::size_t ti = 0; ti < tgt_count; ++ti) total += merged[si * tgt_count + ti];
      if (total <= 0.0) continue;  // unseen source row keeps previous values
      for (std::size_t ti = 0; ti < tgt_count; ++ti) {
        probs[si * tgt_count + ti] = merged[si * tgt_count + ti] / total;
      }
    }
  }
  return TrainResult{std::move(table), std::move(log_likelihoods)};
}

std::vector<std::pair<int, int>> CharAlignment::link_pairs() const {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(links.size());
  for (std::size_t j = 0; j < links.size(); ++j) {
    pairs.emplace_back(links[j], static_cast<int>(j));
  }
  return pairs;
}

namespace {

CharAlignment viterbi_monotonic(const std::u32string& orig, const std::u32string& recog,
                                const TranslationTable& table) {
  const int l = static_cast<int>(orig.size());
  const int m = static_cast<int>(recog.size());
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // state k = index of the last real link so far, -1 if none; real links
  // must be non-decreasing. score[j][k+1] = best log-prob for prefix j.
  std::vector<std::vector<double>> score(
      static_cast<std::size_t>(m) + 1,
      std::vector<double>(static_cast<std::size_t>(l) + 1, kNegInf));
  std::vector<std::vector<int>> choice(
      static_cast<std::size_t>(m),
      std::vector<int>(static_cast<std::size_t>(l) + 1, -2));
  std::vector<std::vector<int>> parent(
      static_cast<std::size_t>(m),
      std::vector<int>(static_cast<std::size_t>(l) + 1, -2));
  score[0][0] = 0.0;

  for (int j = 0; j < m; ++j) {
    double p_null = std::log(table.prob(TranslationTable::kNullToken, recog[j]));
    for (int kprev = -1; kprev < l; ++kprev) {
      double base = score[j][kprev + 1];
      if (base == kNegInf) continue;
      // Real links first, ascending, so equal scores settle on the
      // smallest usable original index; NULL only on strict improvement.
      for (int i = std::max(kprev, 0); i < l; ++i) {
        double cand = base + std::log(table.prob(orig[i], recog[j]));
        if (cand > score[j + 1][i + 1]) {
          score[j + 1][i + 1] = cand;
          choice[j][i + 1] = i;
          parent[j][i + 1] = kprev;
        }
      }
      double cand = base + p_null;
      if (cand > score[j + 1][kprev + 1]) {
        score[j + 1][kprev + 1] = cand;
        choice[j][kprev + 1] = CharAlignment::kNullLink;
        parent[j][kprev + 1] = kprev;
      }
    }
  }

  int best_state = 0;
  for (int k = 0; k <= l; ++k) {
    if (score[m][k] > score[m][best_state]) best_state = k;
  }
  CharAlignment alignment;
  alignment.links.assign(static_cast<std::size_t>(m), CharAlignment::kNullLink);
  int state = best_state;
  for (int j = m - 1; j >= 0; --j) {
    alignment.links[static_cast<std::size_t>(j)] = choice[j][state];
    state = parent[j][state] + 1;
  }
  return alignment;
}

}  // namespace

CharAlignment viterbi_align(const CorruptionPair& pair, const TranslationTable& table,
                            bool monotonic) {
  std::u32string orig = utf8_decode_or_throw(pair.orig.text, "orig phrase");
  std::u32string recog = utf8_decode_or_throw(pair.recog.text, "recog phrase");
  if (monotonic) return viterbi_monotonic(orig, recog, table);

  CharAlignment alignment;
  alignment.links.reserve(recog.size());
  for (char32_t f : recog) {
    int best = CharAlignment::kNullLink;
    double best_prob = -1.0;
    for (std::size_t i = 0; i < orig.size(); ++i) {
      double p = table.prob(orig[i], f);
      if (p > best_prob) {
        best_prob = p;
        best = static_cast<int>(i);
      }
    }
    double p_null = table.prob(TranslationTable::kNullToken, f);
    if (p_null > best_prob) best = CharAlignment::kNullLink;
    alignment.links.push_back(best);
  }
  return alignment;
}

std::vector<CorruptionPair> extract_subphrases(const CorruptionPair& pair,
                                               const CharAlignment& alignment,
                                               const SubphraseParams& params) {
  std::u32string orig = utf8_decode_or_throw(pair.orig.text, "orig phrase");
  std::u32string recog = utf8_decode_or_throw(pair.recog.text, "recog phrase");
  if (alignment.links.size() != recog.size()) {
    throw DataError("alignment length does not match recognized phrase");
  }

  // Word char spans over the original phrase.
  std::vector<Span> words;
  std::size_t pos = 0;
  while (pos < orig.size()) {
    std::size_t end = pos;
    while (end < orig.size() && orig[end] != U' ') ++end;
    words.push_back(Span{pos, end});
    pos = end + 1;
  }
  const int word_count = static_cast<int>(words.size());

  // Minimal recognized span covering the chars linked into [begin, end).
  auto recog_span_for = [&](std::size_t begin, std::size_t end) -> Span {
    std::size_t lo = recog.size();
    std::size_t hi = 0;
    for (std::size_t j = 0; j < alignment.links.size(); ++j) {
      int link = alignment.links[j];
      if (link < 0) continue;
      auto idx = static_cast<std::size_t>(link);
      if (idx >= begin && idx < end) {
        lo = std::min(lo, j);
        hi = std::max(hi, j + 1);
      }
    }
    if (hi <= lo) return Span{0, 0};
    return Span{lo, hi};
  };

  std::vector<Span> word_spans(words.size());
  for (std::size_t w = 0; w < words.size(); ++w) {
    word_spans[w] = recog_span_for(words[w].begin, words[w].end);
  }

  std::vector<CorruptionPair> out;
  for (int order = 1; order <= std::min(params.max_ngram_words, word_count); ++order) {
    for (int a = 0; a + order <= word_count; ++a) {
      int b = a + order - 1;
      Span segment{words[static_cast<std::size_t>(a)].begin,
                   words[static_cast<std::size_t>(b)].end};
      Span span = recog_span_for(segment.begin, segment.end);
      if (span.empty()) continue;

      bool conflict = false;
      for (int w = 0; w < word_count && !conflict; ++w) {
        if (w >= a && w <= b) continue;
        const Span& sibling = word_spans[static_cast<std::size_t>(w)];
        if (sibling.empty() || !span.overlaps(sibling)) continue;
        std::size_t overlap = std::min(span.end, sibling.end) -
                              std::max(span.begin, sibling.begin);
        std::size_t shorter = std::min(span.length(), sibling.length());
        if (static_cast<double>(overlap) >
            params.overlap_drop_fraction * static_cast<double>(shorter)) {
          conflict = true;
        }
      }
      if (conflict) continue;

      // Trim spaces at the span edges; an all-space span is dropped.
      std::size_t lo = span.begin;
      std::size_t hi = span.end;
      while (lo < hi && recog[lo] == U' ') ++lo;
      while (hi > lo && recog[hi - 1] == U' ') --hi;
      if (lo >= hi) continue;

      auto orig_sub = Phrase::try_parse(
          utf8_encode(std::u32string_view(orig).substr(segment.begin,
                                                       segment.end - segment.begin)));
      auto recog_sub =
          Phrase::try_parse(utf8_encode(std::u32string_view(recog).substr(lo, hi - lo)));
      if (!orig_sub || !recog_sub) continue;
      out.push_back(CorruptionPair{std::move(*orig_sub), std::move(*recog_sub),
                                   pair.count, std::string(kSubphraseSourceId)});
    }
  }
  return out;
}

}  // namespace biasgen
