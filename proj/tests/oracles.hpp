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
// Independent brute-force oracles used by the unit and acceptance suites.
// Each one is written from the operation's definition, never in terms of
// the implementation it checks, and stays deliberately naive.

#ifndef BIASGEN_TESTS_ORACLES_HPP_
#define BIASGEN_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracles {

inline std::string lower_ascii(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

inline bool word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '\'';
}

struct SpanHit {
  std::string pattern;
  std::size_t begin;
  std::size_t end;

  auto operator<=>(const SpanHit&) const = default;
};

// Per-pattern substring scan with word-boundary checks on the lowercased
// text. ASCII-only fixtures keep byte offsets equal to scalar offsets.
inline std::vector<SpanHit> naive_scan(const std::string& text,
                                       const std::vector<std::string>& patterns) {
  std::string lowered = lower_ascii(text);
  std::vector<SpanHit> hits;
  for (const auto& raw : patterns) {
    std::string pattern = lower_ascii(raw);
    if (pattern.empty() || pattern.size() > lowered.size()) continue;
    for (std::size_t pos = 0; pos + pattern.size() <= lowered.size(); ++pos) {
      if (lowered.compare(pos, pattern.size(), pattern) != 0) continue;
      std::size_t end = pos + pattern.size();
      bool left_ok = pos == 0 || !word_char(lowered[pos - 1]);
      bool right_ok = end == lowered.size() || !word_char(lowered[end]);
      if (left_ok && right_ok) hits.push_back(SpanHit{pattern, pos, end});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const SpanHit& a, const SpanHit& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    if (a.end != b.end) return a.end > b.end;
    return a.pattern < b.pattern;
  });
  return hits;
}

// Document frequency by naive per-paragraph scan; idf written exactly as
// log(|D| / df) so scores can be compared bit-for-bit.
inline std::map<std::string, double> naive_idf(const std::vector<std::string>& paragraphs,
                                               const std::vector<std::string>& phrases) {
  std::map<std::string, double> scores;
  for (const auto& phrase : phrases) {
    std::uint64_t df = 0;
    for (const auto& paragraph : paragraphs) {
      if (!naive_scan(paragraph, {phrase}).empty()) ++df;
    }
    if (df > 0) {
      scores[lower_ascii(phrase)] = std::log(static_cast<double>(paragraphs.size()) /
                                             static_cast<double>(df));
    }
  }
  return scores;
}

// Levenshtein distance plus the set of (substitutions, insertions,
// deletions) decompositions achievable on minimal-cost paths.
struct EditOracle {
  std::uint64_t distance = 0;
  std::set<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>> decompositions;
};

template <typename Seq>
inline EditOracle edit_paths(const Seq& ref, const Seq& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<std::vector<std::uint64_t>> dp(n + 1, std::vector<std::uint64_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) dp[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) dp[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::uint64_t sub = dp[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      dp[i][j] = std::min({sub, dp[i - 1][j] + 1, dp[i][j - 1] + 1});
    }
  }

  EditOracle oracle;
  oracle.distance = dp[n][m];
  // Enumerate every optimal path, collecting its (S, I, D).
  struct Frame {
    std::size_t i, j;
    std::uint64_t s, ins, del;
  };
  std::vector<Frame> stack{{n, m, 0, 0, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.i == 0 && f.j == 0) {
      oracle.decompositions.insert({f.s, f.ins, f.del});
      continue;
    }
    if (f.i > 0 && f.j > 0) {
      bool eq = ref[f.i - 1] == hyp[f.j - 1];
      if (dp[f.i][f.j] == dp[f.i - 1][f.j - 1] + (eq ? 0 : 1)) {
        stack.push_back({f.i - 1, f.j - 1, f.s + (eq ? 0 : 1), f.ins, f.del});
      }
    }
    if (f.i > 0 && dp[f.i][f.j] == dp[f.i - 1][f.j] + 1) {
      stack.push_back({f.i - 1, f.j, f.s, f.ins, f.del + 1});
    }
    if (f.j > 0 && dp[f.i][f.j] == dp[f.i][f.j - 1] + 1) {
      stack.push_back({f.i, f.j - 1, f.s, f.ins + 1, f.del});
    }
  }
  return oracle;
}

// Expected translation counts after one EM step, by explicit enumeration
// of every alignment function a : recog position -> {NULL, 0..l-1}.
// Feasible only for tiny pairs; verifies the factorized E-step.
struct BruteTable {
  // (source char or '\0' for NULL, target char) -> probability
  std::map<std::pair<char32_t, char32_t>, double> probs;
};

struct BrutePair {
  std::u32string orig;
  std::u32string recog;
  double weight = 1.0;
};

inline BruteTable brute_em_step(const std::vector<BrutePair>& pairs,
                                const BruteTable& current) {
  auto prob = [&](char32_t src, char32_t tgt) {
    auto it = current.probs.find({src, tgt});
    return it == current.probs.end() ? 0.0 : it->second;
  };
  std::map<std::pair<char32_t, char32_t>, double> counts;
  for (const auto& pair : pairs) {
    const std::size_t l = pair.orig.size();
    const std::size_t m = pair.recog.size();
    std::size_t total_alignments = 1;
    for (std::size_t j = 0; j < m; ++j) total_alignments *= (l + 1);

    double z = 0.0;
    std::vector<double> weights(total_alignments, 0.0);
    for (std::size_t code = 0; code < total_alignments; ++code) {
      double w = 1.0;
      std::size_t rest = code;
      for (std::size_t j = 0; j < m; ++j) {
        std::size_t choice = rest % (l + 1);
        rest /= (l + 1);
        char32_t src = choice == 0 ? U'\0' : pair.orig[choice - 1];
        w *= prob(src, pair.recog[j]);
      }
      weights[code] = w;
      z += w;
    }
    for (std::size_t code = 0; code < total_alignments; ++code) {
      if (weights[code] == 0.0) continue;
      double posterior = pair.weight * weights[code] / z;
      std::size_t rest = code;
      for (std::size_t j = 0; j < m; ++j) {
        std::size_t choice = rest % (l + 1);
        rest /= (l + 1);
        char32_t src = choice == 0 ? U'\0' : pair.orig[choice - 1];
        counts[{src, pair.recog[j]}] += posterior;
      }
    }
  }

  BruteTable next;
  std::map<char32_t, double> totals;
  for (const auto& [key, count] : counts) totals[key.first] += count;
  for (const auto& [key, count] : counts) {
    next.probs[key] = count / totals[key.first];
  }
  return next;
}

// 3-sigma multinomial check: observed counts vs expected proportions.
inline bool multinomial_within_3_sigma(const std::map<std::string, std::uint64_t>& observed,
                                       const std::map<std::string, double>& proportions,
                                       std::uint64_t draws) {
  for (const auto& [key, p] : proportions) {
    double expected = static_cast<double>(draws) * p;
    double sigma = std::sqrt(static_cast<double>(draws) * p * (1.0 - p));
    auto it = observed.find(key);
    double got = it == observed.end() ? 0.0 : static_cast<double>(it->second);
    if (std::fabs(got - expected) > 3.0 * sigma + 1e-9) return false;
  }
  return true;
}

}  // namespace oracles

#endif  // BIASGEN_TESTS_ORACLES_HPP_
