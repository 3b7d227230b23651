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

#include <benchmark/benchmark.h>

#include <algorithm>
#include <string>
#include <vector>

#include "biasgen/char_align.hpp"
#include "biasgen/eval_metrics.hpp"
#include "biasgen/inventory.hpp"
#include "biasgen/io.hpp"
#include "biasgen/negative_miner.hpp"
#include "biasgen/normalizer.hpp"
#include "biasgen/occurrence_index.hpp"

namespace {

const std::string kFixtures = BIASGEN_FIXTURE_DIR;

const std::vector<std::string>& corpus() {
  static const std::vector<std::string> lines =
      biasgen::read_lines(kFixtures + "/toy_corpus.txt");
  return lines;
}

const std::vector<biasgen::CorruptionPair>& pairs() {
  static const std::vector<biasgen::CorruptionPair> rows =
      biasgen::read_corruption_pairs(kFixtures + "/toy_pairs.tsv");
  return rows;
}

void BM_ScanCorpus(benchmark::State& state) {
  biasgen::Inventory inv = biasgen::Inventory::from_pairs(pairs());
  auto origs = inv.orig_phrases();
  origs.resize(std::min(origs.size(), static_cast<std::size_t>(state.range(0))));
  auto matcher = biasgen::PatternSet::build(origs);

  std::size_t chars = 0;
  for (const auto& line : corpus()) chars += line.size();
  for (auto _ : state) {
    std::size_t matches = 0;
    for (const auto& line : corpus()) {
      matches += biasgen::scan_paragraph(matcher, line).size();
    }
    benchmark::DoNotOptimize(matches);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(chars) * state.iterations());
}
BENCHMARK(BM_ScanCorpus)->Arg(50)->Arg(200)->Arg(400);

void BM_EmIteration(benchmark::State& state) {
  for (auto _ : state) {
    auto result = biasgen::train_alignment(pairs(), 1,
                                           static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(result.log_likelihoods[0]);
  }
}
BENCHMARK(BM_EmIteration)->Arg(1)->Arg(4);

void BM_Normalize(benchmark::State& state) {
  auto dict = biasgen::load_dictionary(kFixtures + "/norm_dict.tsv");
  std::size_t chars = 0;
  for (const auto& line : corpus()) chars += line.size();
  for (auto _ : state) {
    std::size_t spans = 0;
    for (const auto& line : corpus()) {
      spans += biasgen::normalize_text(dict, line).skip_spans.size();
    }
    benchmark::DoNotOptimize(spans);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(chars) * state.iterations());
}
BENCHMARK(BM_Normalize);

void BM_WordErrorRate(benchmark::State& state) {
  std::string ref = "the republic of the congo lies along the equator in central africa";
  std::string hyp = "the republik of the kongo lies long the equator in central africa";
  for (auto _ : state) {
    benchmark::DoNotOptimize(biasgen::word_error_rate(ref, hyp));
  }
}
BENCHMARK(BM_WordErrorRate);

void BM_RelatedMining(benchmark::State& state) {
  biasgen::Inventory inv = biasgen::Inventory::from_pairs(pairs());
  auto pool = inv.orig_phrases();
  for (auto _ : state) {
    benchmark::DoNotOptimize(biasgen::mine_related(pool).size());
  }
}
BENCHMARK(BM_RelatedMining);

}  // namespace

BENCHMARK_MAIN();
