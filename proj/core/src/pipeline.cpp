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

#include "biasgen/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "biasgen/char_align.hpp"
#include "biasgen/error.hpp"
#include "biasgen/eval_metrics.hpp"
#include "biasgen/inventory.hpp"
#include "biasgen/io.hpp"
#include "biasgen/negative_miner.hpp"
#include "biasgen/normalizer.hpp"
#include "biasgen/occurrence_index.hpp"
#include "biasgen/version.hpp"

namespace biasgen {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

int to_int(std::string_view key, std::string_view value) {
  std::int64_t v = 0;
  if (!parse_int64(trim(value), v)) {
    throw ConfigError("invalid integer for " + std::string(key) + ": '" +
                      std::string(value) + "'");
  }
  return static_cast<int>(v);
}

std::uint64_t to_uint64(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  if (!parse_uint64(trim(value), v)) {
    throw ConfigError("invalid unsigned integer for " + std::string(key) + ": '" +
                      std::string(value) + "'");
  }
  return v;
}

double to_double(std::string_view key, std::string_view value) {
  bool ok = false;
  double v = parse_double(trim(value), ok);
  if (!ok) {
    throw ConfigError("invalid number for " + std::string(key) + ": '" +
                      std::string(value) + "'");
  }
  return v;
}

bool to_bool(std::string_view key, std::string_view value) {
  std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean for " + std::string(key) + ": '" +
                    std::string(value) + "'");
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    std::size_t pos = value.find(';', start);
    std::string item = trim(value.substr(
        start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void require_file(const std::string& stage, const std::string& key,
                  const std::string& path) {
  if (path.empty()) {
    throw ConfigError(stage + ": missing required path for " + key);
  }
  if (!fs::exists(path)) {
    throw ConfigError(stage + ": " + key + " input does not exist: " + path);
  }
}

void prepare_output(const std::string& path) {
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return std::string(buf);
}

StageResult finish_stage(const PipelineConfig& config, const std::string& stage,
                         Clock::time_point start, std::uint64_t records,
                         std::vector<std::pair<std::string, std::string>> config_kvs,
                         const std::vector<std::string>& inputs,
                         const std::vector<std::string>& outputs) {
  StageResult result{stage, records, ms_since(start)};

  RunManifest manifest;
  manifest.stage = stage;
  manifest.add("stage", stage);
  manifest.add("version", kVersion);
  manifest.add("elapsed_ms", format_fixed(result.elapsed_ms, 3));
  manifest.add("records_out", std::to_string(records));
  for (auto& [key, value] : config_kvs) manifest.add("config." + key, value);
  for (const auto& path : inputs) {
    if (fs::exists(path)) manifest.add("input." + path, digest_hex(file_digest(path)));
  }
  for (const auto& path : outputs) {
    if (fs::exists(path)) manifest.add("output." + path, digest_hex(file_digest(path)));
  }
  std::string manifest_path = config.manifest_path(stage);
  prepare_output(manifest_path);
  manifest.write(manifest_path);
  return result;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::string& path) {
  PipelineConfig config;
  std::string section;
  for_each_line(path, [&](std::string_view raw, std::size_t line_no) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') return;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed section");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      return;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": key outside a section");
    }
    config.apply_override(section + "." + key, value);
  });
  return config;
}

void PipelineConfig::apply_override(std::string_view key, std::string_view value) {
  std::string v = trim(value);
  if (key == "global.workdir") workdir = v;
  else if (key == "global.shard_count") shard_count = to_int(key, v);
  else if (key == "global.rng_seed") rng_seed = to_uint64(key, v);
  else if (key == "align.pairs") align_pairs = split_list(v);
  else if (key == "align.iterations") align_iterations = to_int(key, v);
  else if (key == "align.diagonal_strength") align_diagonal_strength = to_double(key, v);
  else if (key == "align.table_out") align_table_out = v;
  else if (key == "expand.monotonic") expand_monotonic = to_bool(key, v);
  else if (key == "expand.max_ngram_words") expand_max_ngram_words = to_int(key, v);
  else if (key == "expand.overlap_drop_fraction") expand_overlap_drop_fraction = to_double(key, v);
  else if (key == "expand.expanded_out") expand_out = v;
  else if (key == "normalize.dictionary") normalize_dictionary = v;
  else if (key == "normalize.corpus") normalize_corpus = v;
  else if (key == "normalize.normalized_out") normalize_out = v;
  else if (key == "normalize.skips_out") normalize_skips_out = v;
  else if (key == "idf.corpus") idf_corpus = v;
  else if (key == "idf.pairs") idf_pairs = v;
  else if (key == "idf.idf_out") idf_out = v;
  else if (key == "idf.case_stats_out") idf_case_stats_out = v;
  else if (key == "index.corpus") index_corpus = v;
  else if (key == "index.pairs") index_pairs = v;
  else if (key == "index.idf") index_idf = v;
  else if (key == "index.case_stats") index_case_stats = v;
  else if (key == "index.phrase_min_idf") phrase_min_idf = to_double(key, v);
  else if (key == "index.edge_word_min_idf") edge_word_min_idf = to_double(key, v);
  else if (key == "index.uppercase_relax_factor") uppercase_relax_factor = to_double(key, v);
  else if (key == "index.filtered_out") index_filtered_out = v;
  else if (key == "index.keys2paragraph_out") index_out = v;
  else if (key == "mine_related.min_sim") related_min_sim = to_double(key, v);
  else if (key == "mine_related.max_sim") related_max_sim = to_double(key, v);
  else if (key == "mine_related.max_block_bucket") related_max_block_bucket = to_uint64(key, v);
  else if (key == "mine_related.pairs") related_pairs = v;
  else if (key == "mine_related.related_out") related_out = v;
  else if (key == "mine_fp.pairs") fp_pairs = v;
  else if (key == "mine_fp.corpus") fp_corpus = v;
  else if (key == "mine_fp.idf") fp_idf = v;
  else if (key == "mine_fp.commonness_threshold") fp_commonness_threshold = to_double(key, v);
  else if (key == "mine_fp.fp_out") fp_out = v;
  else if (key == "synthesize.keys2paragraph") synth_keys2paragraph = v;
  else if (key == "synthesize.skips") synth_skips = v;
  else if (key == "synthesize.pairs") synth_pairs = v;
  else if (key == "synthesize.related") synth_related = v;
  else if (key == "synthesize.fp") synth_fp = v;
  else if (key == "synthesize.num_examples") synth_num_examples = to_uint64(key, v);
  else if (key == "synthesize.list_size") synth_list_size = to_int(key, v);
  else if (key == "synthesize.p_correct") synth_p_correct = to_double(key, v);
  else if (key == "synthesize.fp_min") synth_fp_min = to_int(key, v);
  else if (key == "synthesize.fp_max") synth_fp_max = to_int(key, v);
  else if (key == "synthesize.max_related") synth_max_related = to_int(key, v);
  else if (key == "synthesize.allow_self_replacement") synth_allow_self_replacement = to_bool(key, v);
  else if (key == "synthesize.snippet_min_words") synth_snippet_min_words = to_int(key, v);
  else if (key == "synthesize.snippet_max_words") synth_snippet_max_words = to_int(key, v);
  else if (key == "synthesize.examples_out") synth_out = v;
  else if (key == "eval.references") eval_references = v;
  else if (key == "eval.hypotheses") eval_hypotheses = v;
  else if (key == "eval.baseline") eval_baseline = v;
  else if (key == "eval.vocab") eval_vocab = v;
  else if (key == "eval.ignore_identical") eval_ignore_identical = to_bool(key, v);
  else if (key == "eval.report_out") eval_out = v;
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void PipelineConfig::finalize() {
  auto in_workdir = [&](const char* name) { return workdir + "/" + name; };
  if (align_table_out.empty()) align_table_out = in_workdir("alignment.tsv");
  if (expand_out.empty()) expand_out = in_workdir("expanded_pairs.tsv");
  if (normalize_out.empty()) normalize_out = in_workdir("normalized_corpus.txt");
  if (normalize_skips_out.empty()) normalize_skips_out = in_workdir("normalized_skips.tsv");
  if (idf_corpus.empty()) idf_corpus = normalize_out;
  if (idf_pairs.empty()) idf_pairs = expand_out;
  if (idf_out.empty()) idf_out = in_workdir("idf.tsv");
  if (idf_case_stats_out.empty()) idf_case_stats_out = in_workdir("case_stats.tsv");
  if (index_corpus.empty()) index_corpus = normalize_out;
  if (index_pairs.empty()) index_pairs = expand_out;
  if (index_idf.empty()) index_idf = idf_out;
  if (index_case_stats.empty()) index_case_stats = idf_case_stats_out;
  if (index_filtered_out.empty()) index_filtered_out = in_workdir("filtered_pairs.tsv");
  if (index_out.empty()) index_out = in_workdir("keys2paragraph.tsv");
  if (related_pairs.empty()) related_pairs = index_filtered_out;
  if (related_out.empty()) related_out = in_workdir("keys2related.tsv");
  if (fp_pairs.empty()) fp_pairs = index_filtered_out;
  if (fp_corpus.empty()) fp_corpus = normalize_out;
  if (fp_idf.empty()) fp_idf = idf_out;
  if (fp_out.empty()) fp_out = in_workdir("falsepositives.tsv");
  if (synth_keys2paragraph.empty()) synth_keys2paragraph = index_out;
  if (synth_skips.empty()) synth_skips = normalize_skips_out;
  if (synth_pairs.empty()) synth_pairs = index_filtered_out;
  if (synth_related.empty()) synth_related = related_out;
  if (synth_fp.empty()) synth_fp = fp_out;
  if (synth_out.empty()) synth_out = in_workdir("examples.tsv");
  if (eval_out.empty()) eval_out = in_workdir("eval_report.tsv");
}

SamplingStrategy PipelineConfig::sampling_strategy() const {
  SamplingStrategy strategy;
  strategy.list_size = synth_list_size;
  strategy.p_correct = synth_p_correct;
  strategy.fp_range = IntRange{synth_fp_min, synth_fp_max};
  strategy.max_related = synth_max_related;
  strategy.allow_self_replacement = synth_allow_self_replacement;
  strategy.snippet_word_range = IntRange{synth_snippet_min_words, synth_snippet_max_words};
  strategy.rng_seed = rng_seed;
  return strategy;
}

std::string PipelineConfig::manifest_path(const std::string& stage) const {
  return workdir + "/manifests/" + stage + ".manifest";
}

void validate_stage_config(const PipelineConfig& config, const std::string& stage) {
  if (config.shard_count < 1) throw ConfigError("global.shard_count must be >= 1");

  auto validate_align_params = [&] {
    if (config.align_iterations < 1) throw ConfigError("align.iterations must be >= 1");
    if (config.align_diagonal_strength < 0.0) {
      throw ConfigError("align.diagonal_strength must be >= 0");
    }
    if (config.align_pairs.empty()) throw ConfigError("align.pairs is required");
  };
  auto validate_expand_params = [&] {
    if (config.expand_max_ngram_words < 1) {
      throw ConfigError("expand.max_ngram_words must be >= 1");
    }
    if (config.expand_overlap_drop_fraction < 0.0 ||
        config.expand_overlap_drop_fraction > 1.0) {
      throw ConfigError("expand.overlap_drop_fraction must be in [0, 1]");
    }
  };
  auto validate_filter_params = [&] {
    if (config.uppercase_relax_factor <= 0.0 || config.uppercase_relax_factor > 1.0) {
      throw ConfigError("index.uppercase_relax_factor must be in (0, 1]");
    }
  };
  auto validate_related_params = [&] {
    if (!(config.related_min_sim > 0.0 && config.related_min_sim < config.related_max_sim &&
          config.related_max_sim < 1.0)) {
      throw ConfigError("mine_related similarity bounds must satisfy 0 < min < max < 1");
    }
  };
  auto validate_synth_params = [&] {
    config.sampling_strategy().validate();
    if (config.synth_num_examples < 1) {
      throw ConfigError("synthesize.num_examples must be >= 1");
    }
  };

  if (stage == "align") {
    validate_align_params();
    for (const auto& path : config.align_pairs) require_file(stage, "align.pairs", path);
  } else if (stage == "expand") {
    validate_align_params();
    validate_expand_params();
    for (const auto& path : config.align_pairs) require_file(stage, "align.pairs", path);
    require_file(stage, "align.table_out", config.align_table_out);
  } else if (stage == "normalize") {
    require_file(stage, "normalize.dictionary", config.normalize_dictionary);
    require_file(stage, "normalize.corpus", config.normalize_corpus);
  } else if (stage == "idf") {
    require_file(stage, "idf.corpus", config.idf_corpus);
    require_file(stage, "idf.pairs", config.idf_pairs);
  } else if (stage == "index") {
    validate_filter_params();
    require_file(stage, "index.corpus", config.index_corpus);
    require_file(stage, "index.pairs", config.index_pairs);
    require_file(stage, "index.idf", config.index_idf);
    require_file(stage, "index.case_stats", config.index_case_stats);
  } else if (stage == "mine-related") {
    validate_related_params();
    require_file(stage, "mine_related.pairs", config.related_pairs);
  } else if (stage == "mine-fp") {
    require_file(stage, "mine_fp.pairs", config.fp_pairs);
    require_file(stage, "mine_fp.corpus", config.fp_corpus);
    require_file(stage, "mine_fp.idf", config.fp_idf);
  } else if (stage == "synthesize") {
    validate_synth_params();
    require_file(stage, "synthesize.keys2paragraph", config.synth_keys2paragraph);
    require_file(stage, "synthesize.pairs", config.synth_pairs);
    require_file(stage, "synthesize.related", config.synth_related);
    require_file(stage, "synthesize.fp", config.synth_fp);
    if (!config.synth_skips.empty()) {
      require_file(stage, "synthesize.skips", config.synth_skips);
    }
  } else if (stage == "eval") {
    require_file(stage, "eval.references", config.eval_references);
    require_file(stage, "eval.hypotheses", config.eval_hypotheses);
    require_file(stage, "eval.vocab", config.eval_vocab);
    if (!config.eval_baseline.empty()) {
      require_file(stage, "eval.baseline", config.eval_baseline);
    }
  } else if (stage == "synthesize-all") {
    validate_align_params();
    validate_expand_params();
    validate_filter_params();
    validate_related_params();
    validate_synth_params();
    for (const auto& path : config.align_pairs) require_file(stage, "align.pairs", path);
    require_file(stage, "normalize.dictionary", config.normalize_dictionary);
    require_file(stage, "normalize.corpus", config.normalize_corpus);
  } else if (stage == "stats") {
    // stats reports whatever tables exist; nothing to validate
  } else {
    throw ConfigError("unknown stage '" + stage + "'");
  }
}

std::vector<std::string> execution_plan(const PipelineConfig& config,
                                        const std::string& stage) {
  auto join = [](const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += ", ";
      out += item;
    }
    return out;
  };
  auto line = [&](const std::string& name, const std::vector<std::string>& in,
                  const std::vector<std::string>& out) {
    return name + ": reads [" + join(in) + "] writes [" + join(out) + "]";
  };

  std::map<std::string, std::string> plans;
  plans["align"] = line("align", config.align_pairs, {config.align_table_out});
  plans["expand"] = line("expand", [&] {
    auto in = config.align_pairs;
    in.push_back(config.align_table_out);
    return in;
  }(), {config.expand_out});
  plans["normalize"] = line("normalize", {config.normalize_dictionary, config.normalize_corpus},
                            {config.normalize_out, config.normalize_skips_out});
  plans["idf"] = line("idf", {config.idf_corpus, config.idf_pairs},
                      {config.idf_out, config.idf_case_stats_out});
  plans["index"] = line("index",
                        {config.index_corpus, config.index_pairs, config.index_idf,
                         config.index_case_stats},
                        {config.index_filtered_out, config.index_out});
  plans["mine-related"] = line("mine-related", {config.related_pairs}, {config.related_out});
  plans["mine-fp"] = line("mine-fp", {config.fp_pairs, config.fp_corpus, config.fp_idf},
                          {config.fp_out});
  plans["synthesize"] = line("synthesize",
                             {config.synth_keys2paragraph, config.synth_pairs,
                              config.synth_related, config.synth_fp, config.synth_skips},
                             {config.synth_out});
  plans["eval"] = line("eval",
                       {config.eval_references, config.eval_hypotheses, config.eval_vocab},
                       {config.eval_out});

  if (stage == "synthesize-all") {
    std::vector<std::string> out;
    for (const char* name : {"align", "expand", "normalize", "idf", "index",
                             "mine-related", "mine-fp", "synthesize"}) {
      out.push_back(plans[name]);
    }
    return out;
  }
  auto it = plans.find(stage);
  if (it == plans.end()) throw ConfigError("unknown stage '" + stage + "'");
  return {it->second};
}

void RunManifest::add(std::string key, std::string value) {
  entries.emplace_back(std::move(key), std::move(value));
}

void RunManifest::write(const std::string& path) const {
  std::string tmp = path + ".tmp";
  {
    LineWriter writer(tmp);
    for (const auto& [key, value] : entries) writer.write_line(key + "=" + value);
    writer.close();
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot finalize manifest " + path + ": " + ec.message());
}

StageResult run_align(const PipelineConfig& config) {
  validate_stage_config(config, "align");
  auto start = Clock::now();

  std::vector<std::vector<CorruptionPair>> streams;
  streams.reserve(config.align_pairs.size());
  for (const auto& path : config.align_pairs) {
    streams.push_back(read_corruption_pairs(path));
  }
  Inventory inv = merge_sources(streams);
  TrainResult trained =
      train_alignment(inv.rows(), config.align_iterations, config.shard_count,
                      config.align_diagonal_strength);

  prepare_output(config.align_table_out);
  trained.table.save(config.align_table_out);

  std::vector<std::pair<std::string, std::string>> kvs = {
      {"align.iterations", std::to_string(config.align_iterations)},
      {"align.diagonal_strength", format_double(config.align_diagonal_strength)},
      {"align.final_log_likelihood", format_double(trained.log_likelihoods.back())},
  };
  return finish_stage(config, "align", start, count_lines(config.align_table_out),
                      std::move(kvs), config.align_pairs, {config.align_table_out});
}

StageResult run_expand(const PipelineConfig& config) {
  validate_stage_config(config, "expand");
  auto start = Clock::now();

  std::vector<std::vector<CorruptionPair>> streams;
  for (const auto& path : config.align_pairs) {
    streams.push_back(read_corruption_pairs(path));
  }
  Inventory inv = merge_sources(streams);
  TranslationTable table = TranslationTable::load(config.align_table_out);

  SubphraseParams params{config.expand_max_ngram_words, config.expand_overlap_drop_fraction};
  // Proper subphrases only: segments equal to the whole original phrase
  // add nothing to the inventory.
  std::map<std::pair<std::string, std::string>, std::uint64_t> expansion;
  for (const auto& [orig, variants] : inv.index()) {
    for (const auto& variant : variants) {
      CorruptionPair parent{Phrase::parse(orig), variant.recog, variant.count, "merged"};
      CharAlignment alignment = viterbi_align(parent, table, config.expand_monotonic);
      for (auto& sub : extract_subphrases(parent, alignment, params)) {
        if (sub.orig.text == orig) continue;
        expansion[{sub.orig.text, sub.recog.text}] += sub.count;
      }
    }
  }

  std::vector<CorruptionPair> rows = inv.rows();
  for (const auto& [key, count] : expansion) {
    rows.push_back(CorruptionPair{Phrase::parse(key.first), Phrase::parse(key.second),
                                  count, std::string(kSubphraseSourceId)});
  }
  prepare_output(config.expand_out);
  write_corruption_pairs(config.expand_out, rows);

  std::vector<std::pair<std::string, std::string>> kvs = {
      {"expand.max_ngram_words", std::to_string(config.expand_max_ngram_words)},
      {"expand.overlap_drop_fraction", format_double(config.expand_overlap_drop_fraction)},
      {"expand.monotonic", config.expand_monotonic ? "true" : "false"},
      {"expand.subphrase_pairs", std::to_string(expansion.size())},
  };
  auto inputs = config.align_pairs;
  inputs.push_back(config.align_table_out);
  return finish_stage(config, "expand", start, rows.size(), std::move(kvs), inputs,
                      {config.expand_out});
}

StageResult run_normalize(const PipelineConfig& config) {
  validate_stage_config(config, "normalize");
  auto start = Clock::now();

  NormalizationDict dict = load_dictionary(config.normalize_dictionary);
  std::vector<std::string> corpus = read_lines(config.normalize_corpus);

  std::vector<NormalizedText> results(corpus.size());
  parallel_shards(corpus.size(), config.shard_count,
                  [&](int, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      results[i] = normalize_text(dict, corpus[i]);
                    }
                  });

  prepare_output(config.normalize_out);
  {
    LineWriter writer(config.normalize_out);
    for (const auto& result : results) writer.write_line(result.text);
    writer.close();
  }
  std::vector<std::vector<Span>> spans;
  spans.reserve(results.size());
  for (auto& result : results) spans.push_back(std::move(result.skip_spans));
  prepare_output(config.normalize_skips_out);
  write_skip_spans(config.normalize_skips_out, spans);

  std::vector<std::pair<std::string, std::string>> kvs = {
      {"normalize.dictionary_entries", std::to_string(dict.size())},
      {"normalize.max_order", std::to_string(dict.max_order)},
  };
  return finish_stage(config, "normalize", start, corpus.size(), std::move(kvs),
                      {config.normalize_dictionary, config.normalize_corpus},
                      {config.normalize_out, config.normalize_skips_out});
}

StageResult run_idf(const PipelineConfig& config) {
  validate_stage_config(config, "idf");
  auto start = Clock::now();

  std::vector<std::string> corpus = read_lines(config.idf_corpus);
  Inventory inv = Inventory::from_pairs(read_corruption_pairs(config.idf_pairs));
  std::vector<Phrase> phrases = inv.all_phrases();

  CaseStats case_stats;
  IdfTable table = compute_idf(corpus, phrases, config.shard_count, &case_stats);

  prepare_output(config.idf_out);
  write_idf_table(config.idf_out, table);
  prepare_output(config.idf_case_stats_out);
  write_case_stats(config.idf_case_stats_out, case_stats);

  std::vector<std::pair<std::string, std::string>> kvs = {
      {"idf.doc_count", std::to_string(table.doc_count)},
      {"idf.phrases_scored", std::to_string(table.scores.size())},
      {"idf.words_scored", std::to_string(table.word_scores.size())},
  };
  return finish_stage(config, "idf", start, table.scores.size(), std::move(kvs),
                      {config.idf_corpus, config.idf_pairs},
                      {config.idf_out, config.idf_case_stats_out});
}

StageResult run_index(const PipelineConfig& config) {
  validate_stage_config(config, "index");
  auto start = Clock::now();

  Inventory inv = Inventory::from_pairs(read_corruption_pairs(config.index_pairs));
  IdfTable idf = read_idf_table(config.index_idf);
  CaseStats case_stats = read_case_stats(config.index_case_stats);

  FilterThresholds thresholds{config.phrase_min_idf, config.edge_word_min_idf,
                              config.uppercase_relax_factor};
  Inventory filtered = filter_keys(inv, idf, thresholds, &case_stats);
  if (filtered.empty()) {
    throw DataError("IDF filtering removed every phrase; nothing to index");
  }
  prepare_output(config.index_filtered_out);
  write_corruption_pairs(config.index_filtered_out, filtered.rows());

  PatternSet matcher = PatternSet::build(filtered.orig_phrases());
  std::vector<std::string> corpus = read_lines(config.index_corpus);
  auto records = build_keys2paragraph(corpus, matcher, config.shard_count);
  prepare_output(config.index_out);
  write_paragraph_records(config.index_out, records);

  std::vector<std::pair<std::string, std::string>> kvs = {
      {"index.phrase_min_idf", format_double(config.phrase_min_idf)},
      {"index.edge_word_min_idf", format_double(config.edge_word_min_idf)},
      {"index.uppercase_relax_factor", format_double(config.uppercase_relax_factor)},
      {"index.kept_keys", std::to_string(filtered.orig_count())},
      {"index.dropped_keys", std::to_string(inv.orig_count() - filtered.orig_count())},
  };
  return finish_stage(config, "index", start, records.size(), std::move(kvs),
                      {config.index_corpus, config.index_pairs, config.index_idf,
                       config.index_case_stats},
                      {config.index_filtered_out, config.index_out});
}

StageResult run_mine_related(const PipelineConfig& config) {
  validate_stage_config(config, "mine-related");
  auto start = Clock::now();

  Inventory inv = Inventory::from_pairs(read_corruption_pairs(config.related_pairs));
  RelatedParams params{config.related_min_sim, config.related_max_sim,
                       static_cast<std::size_t>(config.related_max_block_bucket)};
  auto pairs = mine_related(inv.orig_phrases(), params, config.shard_count);

  prepare_output(config.related_out);
  write_related_pairs(config.related_out, pairs);

  std::vector<std::pair<std::string, std::string>> kvs = {
      {"mine_related.min_sim", format_double(config.related_min_sim)},
      {"mine_related.max_sim", format_double(config.related_max_sim)},
  };
  return finish_stage(config, "mine-related", start, pairs.size(), std::move(kvs),
                      {config.related_pairs}, {config.related_out});
}

StageResult run_mine_fp(const PipelineConfig& config) {
  validate_stage_config(config, "mine-fp");
  auto start = Clock::now();

  Inventory inv = Inventory::from_pairs(read_corruption_pairs(config.fp_pairs));
  std::vector<std::string> corpus = read_lines(config.fp_corpus);
  IdfTable idf = read_idf_table(config.fp_idf);
  FalsePositiveParams params{config.fp_commonness_threshold};
  auto pairs = mine_false_positives(inv, corpus, idf, params, config.shard_count);

  prepare_output(config.fp_out);
  write_false_positives(config.fp_out, pairs);

  std::vector<std::pair<std::string, std::string>> kvs = {
      {"mine_fp.commonness_threshold", format_double(config.fp_commonness_threshold)},
  };
  return finish_stage(config, "mine-fp", start, pairs.size(), std::move(kvs),
                      {config.fp_pairs, config.fp_corpus, config.fp_idf},
                      {config.fp_out});
}

StageResult run_synthesize(const PipelineConfig& config) {
  validate_stage_config(config, "synthesize");
  auto start = Clock::now();

  auto records = read_paragraph_records(config.synth_keys2paragraph);
  Inventory inv = Inventory::from_pairs(read_corruption_pairs(config.synth_pairs));
  auto related = read_related_pairs(config.synth_related);
  auto false_positives = read_false_positives(config.synth_fp);
  NegativePools pools = NegativePools::build(std::move(related), std::move(false_positives));

  std::vector<std::vector<Span>> skips(records.size());
  if (!config.synth_skips.empty()) {
    std::map<std::int64_t, std::vector<Span>> by_id;
    for (auto& [id, spans] : read_skip_spans(config.synth_skips)) {
      by_id[id] = std::move(spans);
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto it = by_id.find(records[i].paragraph_id);
      if (it != by_id.end()) skips[i] = it->second;
    }
  }

  std::vector<Phrase> global_pool = inv.orig_phrases();
  SamplingStrategy strategy = config.sampling_strategy();

  SynthesisInputs inputs;
  inputs.records = records;
  inputs.skip_spans = skips;
  inputs.inventory = &inv;
  inputs.pools = &pools;
  inputs.global_pool = global_pool;

  auto examples =
      generate_examples(inputs, strategy, config.synth_num_examples, config.shard_count);
  prepare_output(config.synth_out);
  write_training_examples(config.synth_out, examples);

  std::vector<std::pair<std::string, std::string>> kvs = {
      {"synthesize.num_examples", std::to_string(config.synth_num_examples)},
      {"synthesize.list_size", std::to_string(config.synth_list_size)},
      {"synthesize.p_correct", format_double(config.synth_p_correct)},
      {"synthesize.rng_seed", std::to_string(config.rng_seed)},
  };
  return finish_stage(config, "synthesize", start, examples.size(), std::move(kvs),
                      {config.synth_keys2paragraph, config.synth_pairs,
                       config.synth_related, config.synth_fp},
                      {config.synth_out});
}

std::vector<std::pair<std::string, std::string>> EvalReport::rows() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("sentences", std::to_string(sentence_count));
  out.emplace_back("wer_percent", format_fixed(wer_percent, 2));
  out.emplace_back("cer_percent", format_fixed(cer_percent, 2));
  out.emplace_back("recall", format_fixed(recall, 4));
  out.emplace_back("recall_zero_denominator", recall_zero_denominator ? "true" : "false");
  out.emplace_back("precision", format_fixed(precision, 4));
  out.emplace_back("precision_zero_denominator",
                   precision_zero_denominator ? "true" : "false");
  if (has_changed_rate) {
    out.emplace_back("changed_sentence_percent", format_fixed(changed_sentence_percent, 2));
  }
  return out;
}

std::string EvalReport::summary() const {
  std::string out = "sentences: " + std::to_string(sentence_count) +
                    "\nWER: " + format_fixed(wer_percent, 2) + "%" +
                    "\nCER: " + format_fixed(cer_percent, 2) + "%" +
                    "\nbiasing recall: " + format_fixed(recall, 4) +
                    (recall_zero_denominator ? " (no reference occurrences)" : "") +
                    "\nbiasing precision: " + format_fixed(precision, 4) +
                    (precision_zero_denominator ? " (no hypothesis occurrences)" : "");
  if (has_changed_rate) {
    out += "\nchanged sentences: " + format_fixed(changed_sentence_percent, 2) + "%";
  }
  return out;
}

StageResult run_eval(const PipelineConfig& config, EvalReport* report_out) {
  validate_stage_config(config, "eval");
  auto start = Clock::now();

  auto references = read_lines(config.eval_references);
  auto hypotheses = read_lines(config.eval_hypotheses);
  if (references.empty()) throw DataError("empty reference stream");
  if (references.size() != hypotheses.size()) {
    throw DataError("reference/hypothesis line counts differ");
  }
  std::vector<Phrase> vocab;
  for_each_line(config.eval_vocab, [&](std::string_view line, std::size_t) {
    if (!trim(line).empty()) vocab.push_back(Phrase::parse(line));
  });

  EvalReport report;
  report.sentence_count = references.size();
  ErrorCounts word_total;
  ErrorCounts char_total;
  for (std::size_t i = 0; i < references.size(); ++i) {
    ErrorCounts w = word_error_counts(references[i], hypotheses[i]);
    word_total.substitutions += w.substitutions;
    word_total.insertions += w.insertions;
    word_total.deletions += w.deletions;
    word_total.reference_length += w.reference_length;
    ErrorCounts c = char_error_counts(references[i], hypotheses[i]);
    char_total.substitutions += c.substitutions;
    char_total.insertions += c.insertions;
    char_total.deletions += c.deletions;
    char_total.reference_length += c.reference_length;
  }
  report.wer_percent = word_total.percent();
  report.cer_percent = char_total.percent();

  PrecisionRecall pr = biasing_precision_recall(references, hypotheses, vocab,
                                                config.eval_ignore_identical);
  report.recall = pr.recall;
  report.precision = pr.precision;
  report.recall_zero_denominator = pr.recall_zero_denominator;
  report.precision_zero_denominator = pr.precision_zero_denominator;

  if (!config.eval_baseline.empty()) {
    auto baseline = read_lines(config.eval_baseline);
    report.changed_sentence_percent = changed_sentence_rate(baseline, hypotheses);
    report.has_changed_rate = true;
  }

  prepare_output(config.eval_out);
  {
    LineWriter writer(config.eval_out);
    for (const auto& [key, value] : report.rows()) writer.write_line(key + "\t" + value);
    writer.close();
  }
  if (report_out != nullptr) *report_out = report;

  std::vector<std::pair<std::string, std::string>> kvs = {
      {"eval.ignore_identical", config.eval_ignore_identical ? "true" : "false"},
  };
  return finish_stage(config, "eval", start, references.size(), std::move(kvs),
                      {config.eval_references, config.eval_hypotheses, config.eval_vocab},
                      {config.eval_out});
}

std::vector<StageResult> run_synthesize_all(const PipelineConfig& config) {
  validate_stage_config(config, "synthesize-all");
  auto start = Clock::now();

  std::vector<StageResult> results;
  results.push_back(run_align(config));
  results.push_back(run_expand(config));
  results.push_back(run_normalize(config));
  results.push_back(run_idf(config));
  results.push_back(run_index(config));
  results.push_back(run_mine_related(config));
  results.push_back(run_mine_fp(config));
  results.push_back(run_synthesize(config));

  std::vector<std::pair<std::string, std::string>> kvs;
  for (const auto& result : results) {
    kvs.emplace_back("stage." + result.stage + ".records", std::to_string(result.records_out));
    kvs.emplace_back("stage." + result.stage + ".elapsed_ms",
                     format_fixed(result.elapsed_ms, 3));
  }
  finish_stage(config, "synthesize-all", start, results.back().records_out, std::move(kvs),
               {}, {config.synth_out});
  return results;
}

std::vector<std::pair<std::string, std::uint64_t>> dataset_stats(
    const PipelineConfig& config) {
  std::vector<std::pair<std::string, std::uint64_t>> stats;

  if (fs::exists(config.expand_out)) {
    auto rows = read_corruption_pairs(config.expand_out);
    std::set<std::pair<std::string_view, std::string_view>> pairs;
    std::set<std::string_view> keys;
    for (const auto& row : rows) {
      pairs.insert({row.orig.text, row.recog.text});
      keys.insert(row.orig.text);
    }
    stats.emplace_back("keys2corruptions.rows", rows.size());
    stats.emplace_back("keys2corruptions.pairs", pairs.size());
    stats.emplace_back("keys2corruptions.unique_keys", keys.size());
  }
  if (fs::exists(config.index_filtered_out)) {
    auto rows = read_corruption_pairs(config.index_filtered_out);
    std::set<std::string_view> keys;
    for (const auto& row : rows) keys.insert(row.orig.text);
    stats.emplace_back("filtered_pairs.rows", rows.size());
    stats.emplace_back("filtered_pairs.unique_keys", keys.size());
  }
  if (fs::exists(config.index_out)) {
    std::set<std::string> keys;
    std::uint64_t records = 0;
    for_each_paragraph_record(config.index_out, [&](ParagraphRecord&& rec) {
      ++records;
      for (const auto& occ : rec.occurrences) keys.insert(occ.key.text);
    });
    stats.emplace_back("keys2paragraph.records", records);
    stats.emplace_back("keys2paragraph.unique_keys", keys.size());
  }
  if (fs::exists(config.related_out)) {
    std::set<std::string> keys;
    std::uint64_t rows = 0;
    for_each_related_pair(config.related_out, [&](RelatedPair&& pair) {
      ++rows;
      keys.insert(pair.key.text);
    });
    stats.emplace_back("keys2related.pairs", rows);
    stats.emplace_back("keys2related.unique_keys", keys.size());
  }
  if (fs::exists(config.fp_out)) {
    std::set<std::string> ngrams;
    std::uint64_t rows = 0;
    for_each_false_positive(config.fp_out, [&](FalsePositivePair&& pair) {
      ++rows;
      ngrams.insert(pair.ngram.text);
    });
    stats.emplace_back("falsepositives.pairs", rows);
    stats.emplace_back("falsepositives.unique_ngrams", ngrams.size());
  }
  if (fs::exists(config.synth_out)) {
    stats.emplace_back("examples.rows", count_lines(config.synth_out));
  }
  return stats;
}

void write_skip_spans(const std::string& path,
                      const std::vector<std::vector<Span>>& spans_per_line) {
  LineWriter writer(path);
  for (std::size_t i = 0; i < spans_per_line.size(); ++i) {
    if (spans_per_line[i].empty()) continue;
    std::string row = std::to_string(i) + "\t";
    bool first = true;
    for (const auto& span : spans_per_line[i]) {
      if (!first) row.push_back(';');
      first = false;
      row += std::to_string(span.begin) + "-" + std::to_string(span.end);
    }
    writer.write_line(row);
  }
  writer.close();
}

std::vector<std::pair<std::int64_t, std::vector<Span>>> read_skip_spans(
    const std::string& path) {
  std::vector<std::pair<std::int64_t, std::vector<Span>>> out;
  for_each_line(path, [&](std::string_view line, std::size_t line_no) {
    auto fields = split_tsv(line);
    std::int64_t id = 0;
    if (fields.size() != 2 || !parse_int64(fields[0], id)) {
      throw SchemaError(path, line_no, "malformed skip-span row");
    }
    std::vector<Span> spans;
    std::size_t start = 0;
    std::string_view list = fields[1];
    while (start <= list.size()) {
      std::size_t pos = list.find(';', start);
      std::string_view item = list.substr(
          start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
      if (!item.empty()) {
        std::size_t dash = item.find('-');
        std::uint64_t b = 0, e = 0;
        if (dash == std::string_view::npos || !parse_uint64(item.substr(0, dash), b) ||
            !parse_uint64(item.substr(dash + 1), e) || b > e) {
          throw SchemaError(path, line_no, "malformed span '" + std::string(item) + "'");
        }
        spans.push_back(Span{static_cast<std::size_t>(b), static_cast<std::size_t>(e)});
      }
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    out.emplace_back(id, std::move(spans));
  });
  return out;
}

}  // namespace biasgen
