#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cnrel/annotate.hpp"
#include "cnrel/dataset.hpp"
#include "cnrel/eval.hpp"
#include "cnrel/ingest.hpp"
#include "cnrel/model.hpp"
#include "cnrel/thresholds.hpp"

namespace cnrel {

struct ExperimentConfig {
  std::string assertions_path;
  std::string embeddings_path;
  std::string output_dir;
  std::string language = "en";
  std::string source_filter = "omcs";
  Setting setting = Setting::CW;
  size_t min_count = 2000;       // relations must exceed this to become targets
  uint64_t dataset_seed = 1;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};  // one training run per seed
  size_t vocabulary_limit = 0;   // 0 loads the whole embedding file
  ThresholdMode threshold_mode = ThresholdMode::PerRelation;
  ModelConfig model;
};

std::string experiment_config_to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

struct ManifestEntry {
  std::string path;  // relative to the output directory
  size_t bytes = 0;
  std::string sha256;
};

struct Manifest {
  std::vector<ManifestEntry> entries;  // sorted by path
};

std::string manifest_to_json(const Manifest& manifest, const ExperimentConfig& config);

// Stage runners shared by the orchestrator and the one-shot CLI commands.
// Every runner reads and writes through file paths.

IngestStats run_ingest(const std::string& assertions_path, const std::string& embeddings_path,
                       const std::string& language, const std::string& source_filter,
                       size_t vocabulary_limit, const std::string& out_triples,
                       const std::string& out_stats);

DatasetBundle run_build_dataset(const std::string& triples_path, Setting setting,
                                size_t min_count, uint64_t seed, const std::string& out_dir);

TrainLog run_train(const std::string& bundle_dir, const std::string& embeddings_path,
                   ModelConfig config, size_t vocabulary_limit,
                   const std::string& out_checkpoint, const std::string& out_log);

ThresholdSet run_tune(const std::string& checkpoint_path, const std::string& bundle_dir,
                      ThresholdMode mode, const std::string& out_thresholds);

EvaluationReport run_evaluate(const std::string& checkpoint_path, const std::string& bundle_dir,
                              const std::string& thresholds_path, const std::string& out_report,
                              const std::string& out_table);

// Dataset-level reports: relation statistics, co-occurrence matrix,
// label-multiplicity histogram.
void run_analyze_bundle(const std::string& bundle_dir, const std::string& out_dir);

void run_annotate_sample(const std::string& bundle_dir, size_t n, uint64_t seed,
                         const std::string& out_sheet, const std::string& out_items);

// adjudicator_path may be empty when the annotators agree everywhere.
MergeResult run_annotate_merge(const std::string& items_path, const std::string& first_path,
                               const std::string& second_path,
                               const std::string& adjudicator_path, const std::string& out_json);

// ingest -> dataset -> train/tune/evaluate per seed -> aggregate ->
// analysis reports, with every artifact hashed into manifest.json. Stages
// whose outputs already exist are not recomputed, so a rerun resumes after
// the last intact stage. Errors carry the stage name; the artifacts hashed
// so far land in manifest.partial.json.
Manifest run_experiment(const ExperimentConfig& config);

}  // namespace cnrel
