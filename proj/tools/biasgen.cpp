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
// biasgen: pipeline for synthesizing contextual spell-correction training
// data. One subcommand per stage plus an end-to-end driver; exit codes:
// 0 ok, 2 configuration error, 3 data error, 4 I/O error.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biasgen/error.hpp"
#include "biasgen/pipeline.hpp"
#include "biasgen/version.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string workdir;
  int shard_count = 0;
  std::uint64_t rng_seed = 0;
  bool seed_set = false;
  bool dry_run = false;
  std::vector<std::string> overrides;  // section.key=value
};

biasgen::PipelineConfig make_config(const CliOptions& options) {
  biasgen::PipelineConfig config;
  if (!options.config_path.empty()) {
    try {
      config = biasgen::PipelineConfig::load(options.config_path);
    } catch (const biasgen::IoError& e) {
      throw biasgen::ConfigError(std::string("cannot load config: ") + e.what());
    }
  }
  for (const auto& item : options.overrides) {
    std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw biasgen::ConfigError("--set expects section.key=value, got '" + item + "'");
    }
    config.apply_override(item.substr(0, eq), item.substr(eq + 1));
  }
  if (!options.workdir.empty()) config.workdir = options.workdir;
  if (options.shard_count > 0) config.shard_count = options.shard_count;
  if (options.seed_set) config.rng_seed = options.rng_seed;
  config.finalize();
  return config;
}

int run_stage(const CliOptions& options, const std::string& stage) {
  biasgen::PipelineConfig config = make_config(options);
  biasgen::validate_stage_config(config, stage);

  if (options.dry_run) {
    for (const auto& line : biasgen::execution_plan(config, stage)) {
      std::printf("%s\n", line.c_str());
    }
    return 0;
  }

  auto print_result = [](const biasgen::StageResult& result) {
    std::printf("%s: %llu records in %.1f ms\n", result.stage.c_str(),
                static_cast<unsigned long long>(result.records_out), result.elapsed_ms);
  };

  if (stage == "align") print_result(biasgen::run_align(config));
  else if (stage == "expand") print_result(biasgen::run_expand(config));
  else if (stage == "normalize") print_result(biasgen::run_normalize(config));
  else if (stage == "idf") print_result(biasgen::run_idf(config));
  else if (stage == "index") print_result(biasgen::run_index(config));
  else if (stage == "mine-related") print_result(biasgen::run_mine_related(config));
  else if (stage == "mine-fp") print_result(biasgen::run_mine_fp(config));
  else if (stage == "synthesize") print_result(biasgen::run_synthesize(config));
  else if (stage == "eval") {
    biasgen::EvalReport report;
    biasgen::StageResult result = biasgen::run_eval(config, &report);
    std::printf("%s\n", report.summary().c_str());
    print_result(result);
  } else if (stage == "synthesize-all") {
    for (const auto& result : biasgen::run_synthesize_all(config)) print_result(result);
  } else if (stage == "stats") {
    for (const auto& [name, value] : biasgen::dataset_stats(config)) {
      std::printf("%s\t%llu\n", name.c_str(), static_cast<unsigned long long>(value));
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesizes contextual spell-correction training data: builds a "
               "phrase corruption inventory, mines hard-negative biasing phrases "
               "from a text corpus and emits tagged training examples."};
  app.set_version_flag("--version", biasgen::kVersion);
  app.require_subcommand(1);

  CliOptions options;
  const char* env_config = std::getenv("BIASGEN_CONFIG");
  if (env_config != nullptr) options.config_path = env_config;

  app.add_option("-c,--config", options.config_path,
                 "Pipeline config file (default: $BIASGEN_CONFIG)");
  app.add_option("-w,--workdir", options.workdir, "Override global.workdir");
  app.add_option("-j,--shards", options.shard_count, "Override global.shard_count");
  auto* seed_opt =
      app.add_option("--seed", options.rng_seed, "Override global.rng_seed");
  app.add_flag("-n,--dry-run", options.dry_run,
               "Validate config and print the execution plan without writing");
  app.add_option("--set", options.overrides,
                 "Override a config value as section.key=value (repeatable)")
      ->take_all();

  struct StageSpec {
    const char* name;
    const char* description;
  };
  const StageSpec stages[] = {
      {"align", "Train the character alignment model over corruption pairs"},
      {"expand", "Extract aligned subphrases and expand the pair inventory"},
      {"normalize", "Dictionary-normalize the corpus, flagging unnormalizable spans"},
      {"idf", "Compute phrase and word document frequencies over the corpus"},
      {"index", "Filter common phrases and index phrase occurrences per paragraph"},
      {"mine-related", "Mine related-phrase hard negatives"},
      {"mine-fp", "Mine false-positive hard negatives from corpus occurrences"},
      {"synthesize", "Generate training examples with simulated biasing lists"},
      {"eval", "Score hypotheses against references (WER/CER, recall/precision)"},
      {"stats", "Report record counts for every generated table"},
      {"synthesize-all", "Run every stage in order on one config"},
  };
  for (const auto& stage : stages) {
    app.add_subcommand(stage.name, stage.description)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  options.seed_set = seed_opt->count() > 0;

  try {
    return run_stage(options, app.get_subcommands().front()->get_name());
  } catch (const biasgen::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const biasgen::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const biasgen::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
