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
// Pipeline orchestration: declarative configuration with per-stage
// sections, run manifests for provenance, the individual stage drivers
// and the end-to-end synthesize-all composition.

#ifndef BIASGEN_PIPELINE_HPP_
#define BIASGEN_PIPELINE_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "biasgen/char_align.hpp"
#include "biasgen/synthesizer.hpp"

namespace biasgen {

// Flat view of the sectioned key-value config file. Unknown keys are
// rejected; flags override file values via apply_override. Empty output
// paths are derived from workdir by finalize().
struct PipelineConfig {
  // [global]
  std::string workdir = "out";
  int shard_count = 1;
  std::uint64_t rng_seed = 1;

  // [align]
  std::vector<std::string> align_pairs;  // input pair tables, one per stream
  int align_iterations = 10;
  double align_diagonal_strength = kDefaultDiagonalStrength;
  std::string align_table_out;

  // [expand]
  bool expand_monotonic = false;
  int expand_max_ngram_words = 3;
  double expand_overlap_drop_fraction = 0.5;
  std::string expand_out;

  // [normalize]
  std::string normalize_dictionary;
  std::string normalize_corpus;
  std::string normalize_out;
  std::string normalize_skips_out;

  // [idf]
  std::string idf_corpus;  // defaults to the normalized corpus
  std::string idf_pairs;   // defaults to the expanded pair table
  std::string idf_out;
  std::string idf_case_stats_out;

  // [index]
  std::string index_corpus;      // defaults to the normalized corpus
  std::string index_pairs;       // defaults to the expanded pair table
  std::string index_idf;         // defaults to idf_out
  std::string index_case_stats;  // defaults to idf_case_stats_out
  double phrase_min_idf = 4.0;
  double edge_word_min_idf = 3.0;
  double uppercase_relax_factor = 0.5;
  std::string index_filtered_out;
  std::string index_out;

  // [mine_related]
  double related_min_sim = 0.5;
  double related_max_sim = 0.9;
  std::uint64_t related_max_block_bucket = 5000;
  std::string related_pairs;  // pool source, defaults to filtered pairs
  std::string related_out;

  // [mine_fp]
  std::string fp_pairs;   // defaults to filtered pairs
  std::string fp_corpus;  // defaults to the normalized corpus
  std::string fp_idf;     // defaults to idf_out
  double fp_commonness_threshold = 3.0;
  std::string fp_out;

  // [synthesize]
  std::string synth_keys2paragraph;  // defaults to index_out
  std::string synth_skips;           // defaults to normalize_skips_out
  std::string synth_pairs;           // defaults to filtered pairs
  std::string synth_related;         // defaults to related_out
  std::string synth_fp;              // defaults to fp_out
  std::uint64_t synth_num_examples = 1000;
  int synth_list_size = 10;
  double synth_p_correct = 0.5;
  int synth_fp_min = 1;
  int synth_fp_max = 3;
  int synth_max_related = 3;
  bool synth_allow_self_replacement = true;
  int synth_snippet_min_words = 5;
  int synth_snippet_max_words = 25;
  std::string synth_out;

  // [eval]
  std::string eval_references;
  std::string eval_hypotheses;
  std::string eval_baseline;  // optional; enables the changed-sentence rate
  std::string eval_vocab;
  bool eval_ignore_identical = false;
  std::string eval_out;

  static PipelineConfig load(const std::string& path);

  // key is "section.key" as it appears in the file.
  void apply_override(std::string_view key, std::string_view value);

  // Fills empty output paths with workdir-based defaults and chains
  // stage inputs to upstream outputs.
  void finalize();

  SamplingStrategy sampling_strategy() const;
  std::string manifest_path(const std::string& stage) const;
};

// Throws ConfigError when the named stage cannot run: missing inputs,
// out-of-range parameters. `stage` is a subcommand name.
void validate_stage_config(const PipelineConfig& config, const std::string& stage);

// Human-readable dry-run plan: one line per stage with inputs/outputs.
std::vector<std::string> execution_plan(const PipelineConfig& config,
                                        const std::string& stage);

// Line-oriented provenance record, written atomically on stage completion.
struct RunManifest {
  std::string stage;
  std::vector<std::pair<std::string, std::string>> entries;

  void add(std::string key, std::string value);
  void write(const std::string& path) const;
};

struct StageResult {
  std::string stage;
  std::uint64_t records_out = 0;
  double elapsed_ms = 0.0;
};

StageResult run_align(const PipelineConfig& config);
StageResult run_expand(const PipelineConfig& config);
StageResult run_normalize(const PipelineConfig& config);
StageResult run_idf(const PipelineConfig& config);
StageResult run_index(const PipelineConfig& config);
StageResult run_mine_related(const PipelineConfig& config);
StageResult run_mine_fp(const PipelineConfig& config);
StageResult run_synthesize(const PipelineConfig& config);

struct EvalReport {
  double wer_percent = 0.0;
  double cer_percent = 0.0;
  double recall = 1.0;
  double precision = 1.0;
  bool recall_zero_denominator = false;
  bool precision_zero_denominator = false;
  double changed_sentence_percent = 0.0;
  bool has_changed_rate = false;
  std::uint64_t sentence_count = 0;

  std::vector<std::pair<std::string, std::string>> rows() const;
  std::string summary() const;
};

StageResult run_eval(const PipelineConfig& config, EvalReport* report = nullptr);

// All stages in dependency order; stops at the first failure.
std::vector<StageResult> run_synthesize_all(const PipelineConfig& config);

// Row counts and distinct-key counts for every configured table that
// exists on disk.
std::vector<std::pair<std::string, std::uint64_t>> dataset_stats(
    const PipelineConfig& config);

// Skip-span sidecar: paragraph_id \t begin-end;begin-end;... rows for
// paragraphs with at least one unnormalizable fragment.
void write_skip_spans(const std::string& path,
                      const std::vector<std::vector<Span>>& spans_per_line);
std::vector<std::pair<std::int64_t, std::vector<Span>>> read_skip_spans(
    const std::string& path);

}  // namespace biasgen

#endif  // BIASGEN_PIPELINE_HPP_
