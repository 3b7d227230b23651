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

#include "biasgen/synthesizer.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "biasgen/error.hpp"
#include "biasgen/io.hpp"

namespace biasgen {

void SamplingStrategy::validate() const {
  if (list_size < 1) throw ConfigError("list_size must be >= 1");
  if (p_correct < 0.0 || p_correct > 1.0) throw ConfigError("p_correct must be in [0, 1]");
  if (fp_range.min < 0 || fp_range.min > fp_range.max) {
    throw ConfigError("fp_range must satisfy 0 <= min <= max");
  }
  if (max_related < 0) throw ConfigError("max_related must be >= 0");
  if (fp_range.max + max_related + 1 > list_size) {
    throw ConfigError("fp_range.max + max_related + 1 must not exceed list_size");
  }
  if (snippet_word_range.min < 1 || snippet_word_range.min > snippet_word_range.max) {
    throw ConfigError("snippet_word_range must satisfy 1 <= min <= max");
  }
}

std::optional<Snippet> cut_snippet(const ParagraphRecord& record,
                                   std::span<const Span> skip_spans,
                                   const SamplingStrategy& strategy, SplitRng& rng) {
  if (record.occurrences.empty()) return std::nullopt;
  std::u32string text = utf8_decode_or_throw(record.text, "paragraph text");
  auto words = tokenize_with_spans(text);
  if (words.empty()) return std::nullopt;

  const int word_count = static_cast<int>(words.size());
  int lo = std::min(strategy.snippet_word_range.min, word_count);
  int hi = std::min(strategy.snippet_word_range.max, word_count);
  int window_words = static_cast<int>(rng.uniform_int(lo, hi));

  std::vector<std::size_t> valid_starts;
  for (int s = 0; s + window_words <= word_count; ++s) {
    Span window{words[static_cast<std::size_t>(s)].span.begin,
                words[static_cast<std::size_t>(s + window_words - 1)].span.end};
    bool blocked = false;
    for (const auto& skip : skip_spans) {
      if (window.overlaps(skip)) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;
    bool has_occurrence = false;
    for (const auto& occ : record.occurrences) {
      if (window.contains(occ.span)) {
        has_occurrence = true;
        break;
      }
    }
    if (has_occurrence) valid_starts.push_back(static_cast<std::size_t>(s));
  }
  if (valid_starts.empty()) return std::nullopt;

  std::size_t start = valid_starts[rng.uniform_u64(valid_starts.size())];
  Span window{words[start].span.begin,
              words[start + static_cast<std::size_t>(window_words) - 1].span.end};

  Snippet snippet;
  snippet.window = window;
  snippet.text =
      utf8_encode(std::u32string_view(text).substr(window.begin, window.length()));

  // Contained occurrences, rebased; resolve overlaps leftmost-longest,
  // then cap distinct phrases at the positive-candidate budget.
  std::size_t last_end = 0;
  std::set<std::string> distinct;
  const auto cap = static_cast<std::size_t>(strategy.max_positives());
  for (const auto& occ : record.occurrences) {
    if (!window.contains(occ.span)) continue;
    Span rebased{occ.span.begin - window.begin, occ.span.end - window.begin};
    if (!snippet.occurrences.empty() && rebased.begin < last_end) continue;
    if (!distinct.contains(occ.key.text) && distinct.size() >= cap) continue;
    distinct.insert(occ.key.text);
    snippet.occurrences.push_back(Occurrence{occ.key, rebased, occ.uppercase_start});
    last_end = rebased.end;
  }
  if (snippet.occurrences.empty()) return std::nullopt;
  return snippet;
}

CorruptionResult corrupt_snippet(const Snippet& snippet, const Inventory& inv,
                                 const SamplingStrategy& strategy, SplitRng& rng) {
  std::u32string lowered =
      ascii_lower_copy(utf8_decode_or_throw(snippet.text, "snippet text"));

  CorruptionResult result;
  std::u32string out;
  std::size_t cursor = 0;
  for (const auto& occ : snippet.occurrences) {
    const auto* variants = inv.variants(occ.key.text);
    if (variants == nullptr) {
      throw DataError("occurrence key '" + occ.key.text + "' missing from inventory");
    }
    std::uint64_t total = 0;
    for (const auto& variant : *variants) {
      if (!strategy.allow_self_replacement && variant.recog.text == occ.key.text) continue;
      total += variant.count;
    }
    if (total == 0) continue;  // nothing to substitute with

    std::uint64_t draw = rng.uniform_u64(total);
    const Phrase* chosen = nullptr;
    for (const auto& variant : *variants) {
      if (!strategy.allow_self_replacement && variant.recog.text == occ.key.text) continue;
      if (draw < variant.count) {
        chosen = &variant.recog;
        break;
      }
      draw -= variant.count;
    }

    out += std::u32string_view(lowered).substr(cursor, occ.span.begin - cursor);
    std::size_t corrupted_begin = out.size();
    out += utf8_decode_or_throw(chosen->text, "variant");
    result.substitutions.push_back(Substitution{
        occ.span, Span{corrupted_begin, out.size()}, occ.key, *chosen});
    cursor = occ.span.end;
  }
  out += std::u32string_view(lowered).substr(cursor);
  result.corrupted = utf8_encode(out);
  return result;
}

namespace {

// Uniform draw of `take` items without replacement, in place.
template <typename T>
std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t take,
                                          SplitRng& rng) {
  take = std::min(take, pool.size());
  for (std::size_t t = 0; t < take; ++t) {
    std::size_t j = t + static_cast<std::size_t>(rng.uniform_u64(pool.size() - t));
    std::swap(pool[t], pool[j]);
  }
  pool.resize(take);
  return pool;
}

}  // namespace

BiasingList assemble_biasing_list(std::span<const Phrase> positives,
                                  const NegativePools& pools,
                                  std::span<const Phrase> global_pool,
                                  std::string_view corrupted_snippet,
                                  const SamplingStrategy& strategy, SplitRng& rng) {
  const auto k = static_cast<std::size_t>(strategy.list_size);
  if (global_pool.size() < k) {
    throw DataError("global phrase pool smaller than the biasing list size");
  }

  BiasingList list;
  list.positives_included = rng.bernoulli(strategy.p_correct) && !positives.empty();

  std::unordered_set<std::string> used;
  if (list.positives_included) {
    for (const auto& p : positives) {
      if (used.insert(p.text).second) {
        list.candidates.push_back(Candidate{p, CandidateLabel::kPositive});
      }
    }
  }

  // False positives matching the snippet's n-grams.
  {
    std::vector<Phrase> avail;
    for (const auto& fp : pools.false_positives_in(corrupted_snippet)) {
      if (used.contains(fp.phrase.text)) continue;
      if (std::any_of(avail.begin(), avail.end(),
                      [&](const Phrase& p) { return p.text == fp.phrase.text; })) {
        continue;
      }
      avail.push_back(fp.phrase);
    }
    if (!avail.empty()) {
      auto want = static_cast<std::size_t>(
          rng.uniform_int(strategy.fp_range.min, strategy.fp_range.max));
      for (auto& phrase : sample_without_replacement(std::move(avail), want, rng)) {
        used.insert(phrase.text);
        list.candidates.push_back(
            Candidate{std::move(phrase), CandidateLabel::kFalsePositive});
      }
    }
  }

  // Related distractors only accompany correct candidates.
  if (list.positives_included && strategy.max_related > 0) {
    std::vector<Phrase> avail;
    std::unordered_set<std::string> gathered;
    for (const auto& p : positives) {
      for (const auto& rp : pools.related_for(p.text)) {
        if (used.contains(rp.related.text)) continue;
        if (gathered.insert(rp.related.text).second) avail.push_back(rp.related);
      }
    }
    auto want = static_cast<std::size_t>(strategy.max_related);
    for (auto& phrase : sample_without_replacement(std::move(avail), want, rng)) {
      used.insert(phrase.text);
      list.candidates.push_back(Candidate{std::move(phrase), CandidateLabel::kRelated});
    }
  }

  // Random fill to exactly k.
  std::uint64_t attempts = 0;
  const std::uint64_t max_attempts = 200 * static_cast<std::uint64_t>(k) + 100;
  while (list.candidates.size() < k) {
    if (++attempts > max_attempts) {
      throw DataError("global phrase pool exhausted while filling the biasing list");
    }
    const Phrase& pick = global_pool[rng.uniform_u64(global_pool.size())];
    if (!used.insert(pick.text).second) continue;
    list.candidates.push_back(Candidate{pick, CandidateLabel::kRandom});
  }

  rng.shuffle(list.candidates);
  return list;
}

TrainingExample emit_example(const Snippet& snippet, const CorruptionResult& corruption,
                             const BiasingList& list) {
  TrainingExample ex;
  ex.original_snippet = ascii_lower_copy(snippet.text);
  ex.corrupted_snippet = corruption.corrupted;
  ex.substitutions = corruption.substitutions;
  ex.candidates = list.candidates;
  ex.no_correct_candidate = !list.positives_included;
  ex.char_tags.assign(scalar_length(ex.corrupted_snippet), 0);

  if (list.positives_included) {
    for (const auto& sub : ex.substitutions) {
      int tag = 0;
      for (std::size_t i = 0; i < ex.candidates.size(); ++i) {
        if (ex.candidates[i].label == CandidateLabel::kPositive &&
            ex.candidates[i].phrase.text == sub.orig_phrase.text) {
          tag = static_cast<int>(i) + 1;
          break;
        }
      }
      if (tag == 0) {
        throw DataError("substituted phrase '" + sub.orig_phrase.text +
                        "' missing from positive candidates");
      }
      for (std::size_t p = sub.corrupted_span.begin; p < sub.corrupted_span.end; ++p) {
        ex.char_tags[p] = tag;
      }
    }
  }
  validate_training_example(ex);
  return ex;
}

std::vector<TrainingExample> generate_examples(const SynthesisInputs& inputs,
                                               const SamplingStrategy& strategy,
                                               std::uint64_t count, int shard_count) {
  strategy.validate();
  if (inputs.inventory == nullptr || inputs.pools == nullptr) {
    throw DataError("synthesis inputs missing inventory or pools");
  }
  if (inputs.records.empty()) throw DataError("no paragraph records to synthesize from");
  if (!inputs.skip_spans.empty() && inputs.skip_spans.size() != inputs.records.size()) {
    throw DataError("skip-span list does not match record count");
  }

  static const std::vector<Span> kNoSkips;
  auto skips_for = [&](std::size_t i) -> std::span<const Span> {
    if (inputs.skip_spans.empty()) return kNoSkips;
    return inputs.skip_spans[i];
  };

  struct Produced {
    std::size_t record_pos;
    std::uint64_t slot;
    TrainingExample example;
  };
  std::vector<Produced> produced;
  std::uint64_t slot = 0;
  int empty_passes = 0;

  while (produced.size() < count) {
    std::vector<std::optional<TrainingExample>> slot_results(inputs.records.size());
    parallel_shards(inputs.records.size(), shard_count,
                    [&](int, std::size_t begin, std::size_t end) {
                      for (std::size_t i = begin; i < end; ++i) {
                        const auto& record = inputs.records[i];
                        SplitRng rng(strategy.rng_seed,
                                     static_cast<std::uint64_t>(record.paragraph_id),
                                     slot);
                        auto snippet = cut_snippet(record, skips_for(i), strategy, rng);
                        if (!snippet) continue;
                        auto corruption =
                            corrupt_snippet(*snippet, *inputs.inventory, strategy, rng);
                        std::vector<Phrase> positives;
                        for (const auto& sub : corruption.substitutions) {
                          if (std::none_of(positives.begin(), positives.end(),
                                           [&](const Phrase& p) {
                                             return p.text == sub.orig_phrase.text;
                                           })) {
                            positives.push_back(sub.orig_phrase);
                          }
                        }
                        auto list = assemble_biasing_list(positives, *inputs.pools,
                                                          inputs.global_pool,
                                                          corruption.corrupted, strategy,
                                                          rng);
                        slot_results[i] = emit_example(*snippet, corruption, list);
                      }
                    });

    std::size_t added = 0;
    for (std::size_t i = 0; i < slot_results.size(); ++i) {
      if (!slot_results[i]) continue;
      produced.push_back(Produced{i, slot, std::move(*slot_results[i])});
      ++added;
    }
    empty_passes = added == 0 ? empty_passes + 1 : 0;
    if (empty_passes >= 20) {
      throw DataError("corpus cannot yield the requested number of examples (" +
                      std::to_string(produced.size()) + " of " + std::to_string(count) +
                      ")");
    }
    ++slot;
  }

  std::stable_sort(produced.begin(), produced.end(),
                   [](const Produced& a, const Produced& b) {
                     if (a.record_pos != b.record_pos) return a.record_pos < b.record_pos;
                     return a.slot < b.slot;
                   });
  produced.resize(count);

  std::vector<TrainingExample> out;
  out.reserve(produced.size());
  for (auto& item : produced) out.push_back(std::move(item.example));
  return out;
}

}  // namespace biasgen
