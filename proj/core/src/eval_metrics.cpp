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

#include "biasgen/eval_metrics.hpp"

#include <algorithm>

#include "biasgen/error.hpp"
#include "biasgen/text.hpp"

namespace biasgen {

namespace {

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
    if (i >= text.size()) break;
    std::size_t start = i;
    while (i < text.size() && text[i] != ' ' && text[i] != '\t') ++i;
    tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

// Edit alignment between token sequences. match_ref_to_hyp[i] is the
// hypothesis index matched (exact token equality) to reference token i,
// or -1; symmetrically for match_hyp_to_ref.
template <typename Seq>
ErrorCounts align_counts(const Seq& ref, const Seq& hyp,
                         std::vector<std::int64_t>* match_ref_to_hyp = nullptr,
                         std::vector<std::int64_t>* match_hyp_to_ref = nullptr) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::uint64_t> dp((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::uint64_t& {
    return dp[i * (m + 1) + j];
  };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::uint64_t sub = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({sub, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }

  if (match_ref_to_hyp != nullptr) match_ref_to_hyp->assign(n, -1);
  if (match_hyp_to_ref != nullptr) match_hyp_to_ref->assign(m, -1);

  ErrorCounts counts;
  counts.reference_length = n;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      if (ref[i - 1] == hyp[j - 1]) {
        if (match_ref_to_hyp != nullptr) {
          (*match_ref_to_hyp)[i - 1] = static_cast<std::int64_t>(j - 1);
        }
        if (match_hyp_to_ref != nullptr) {
          (*match_hyp_to_ref)[j - 1] = static_cast<std::int64_t>(i - 1);
        }
      } else {
        ++counts.substitutions;
      }
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++counts.deletions;
      --i;
    } else {
      ++counts.insertions;
      --j;
    }
  }
  return counts;
}

}  // namespace

ErrorCounts word_error_counts(std::string_view reference, std::string_view hypothesis) {
  auto ref = whitespace_tokens(reference);
  if (ref.empty()) throw DataError("empty reference for word error rate");
  auto hyp = whitespace_tokens(hypothesis);
  return align_counts(ref, hyp);
}

double word_error_rate(std::string_view reference, std::string_view hypothesis) {
  return word_error_counts(reference, hypothesis).percent();
}

ErrorCounts char_error_counts(std::string_view reference, std::string_view hypothesis) {
  std::u32string ref = utf8_decode_or_throw(reference, "reference");
  if (ref.empty()) throw DataError("empty reference for char error rate");
  std::u32string hyp = utf8_decode_or_throw(hypothesis, "hypothesis");
  return align_counts(ref, hyp);
}

double char_error_rate(std::string_view reference, std::string_view hypothesis) {
  return char_error_counts(reference, hypothesis).percent();
}

PrecisionRecall biasing_precision_recall(std::span<const std::string> references,
                                         std::span<const std::string> hypotheses,
                                         std::span<const Phrase> vocab,
                                         bool ignore_identical_sentences) {
  if (references.size() != hypotheses.size()) {
    throw DataError("reference/hypothesis stream length mismatch");
  }

  // Occurrence = contiguous token n-gram equal to a vocab phrase.
  auto occurrences_in = [&](const std::vector<std::string>& tokens) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (const auto& phrase : vocab) {
      auto words = phrase.words();
      if (words.empty() || words.size() > tokens.size()) continue;
      for (std::size_t a = 0; a + words.size() <= tokens.size(); ++a) {
        bool equal = true;
        for (std::size_t w = 0; w < words.size() && equal; ++w) {
          equal = tokens[a + w] == words[w];
        }
        if (equal) spans.emplace_back(a, a + words.size());
      }
    }
    return spans;
  };

  PrecisionRecall result;
  for (std::size_t s = 0; s < references.size(); ++s) {
    if (ignore_identical_sentences && references[s] == hypotheses[s]) continue;
    auto ref_tokens = whitespace_tokens(ascii_lower_copy(references[s]));
    auto hyp_tokens = whitespace_tokens(ascii_lower_copy(hypotheses[s]));

    std::vector<std::int64_t> ref_match;
    std::vector<std::int64_t> hyp_match;
    align_counts(ref_tokens, hyp_tokens, &ref_match, &hyp_match);

    auto survived = [](const std::vector<std::int64_t>& match, std::size_t a,
                       std::size_t b) {
      // Every token matched, to contiguous counterpart positions.
      for (std::size_t p = a; p < b; ++p) {
        if (match[p] < 0) return false;
        if (p > a && match[p] != match[p - 1] + 1) return false;
      }
      return true;
    };

    for (auto [a, b] : occurrences_in(ref_tokens)) {
      ++result.reference_occurrences;
      if (survived(ref_match, a, b)) ++result.reference_hits;
    }
    for (auto [a, b] : occurrences_in(hyp_tokens)) {
      ++result.hypothesis_occurrences;
      if (survived(hyp_match, a, b)) ++result.hypothesis_hits;
    }
  }

  if (result.reference_occurrences == 0) {
    result.recall_zero_denominator = true;
    result.recall = 1.0;
  } else {
    result.recall = static_cast<double>(result.reference_hits) /
                    static_cast<double>(result.reference_occurrences);
  }
  if (result.hypothesis_occurrences == 0) {
    result.precision_zero_denominator = true;
    result.precision = 1.0;
  } else {
    result.precision = static_cast<double>(result.hypothesis_hits) /
                       static_cast<double>(result.hypothesis_occurrences);
  }
  return result;
}

double changed_sentence_rate(std::span<const std::string> baseline,
                             std::span<const std::string> corrected) {
  if (baseline.size() != corrected.size()) {
    throw DataError("baseline/corrected stream length mismatch");
  }
  if (baseline.empty()) return 0.0;
  std::uint64_t changed = 0;
  for (std::size_t i = 0; i < baseline.size(); ++i) {
    if (baseline[i] != corrected[i]) ++changed;
  }
  return 100.0 * static_cast<double>(changed) / static_cast<double>(baseline.size());
}

}  // namespace biasgen
