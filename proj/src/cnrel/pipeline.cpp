#include "cnrel/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "cnrel/analysis.hpp"
#include "cnrel/common.hpp"

namespace fs = std::filesystem;

namespace cnrel {

namespace {

std::optional<size_t> as_limit(size_t vocabulary_limit) {
  if (vocabulary_limit == 0) return std::nullopt;
  return vocabulary_limit;
}

VocabularySet store_vocabulary(const EmbeddingStore& store) {
  VocabularySet vocab;
  for (size_t row = 0; row < store.size(); ++row) vocab.tokens.insert(store.token_at(row));
  return vocab;
}

std::string model_label(const ModelConfig& config, ThresholdMode mode) {
  return encoder_name(config.encoder) + "-" + composition_name(config.composition) + "-" +
         threshold_mode_name(mode);
}

void ensure_parent(const std::string& path) {
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& config) {
  nlohmann::ordered_json j;
  j["assertions"] = config.assertions_path;
  j["embeddings"] = config.embeddings_path;
  j["output_dir"] = config.output_dir;
  j["language"] = config.language;
  j["source_filter"] = config.source_filter;
  j["setting"] = setting_name(config.setting);
  j["min_count"] = config.min_count;
  j["dataset_seed"] = config.dataset_seed;
  j["seeds"] = config.seeds;
  j["vocabulary_limit"] = config.vocabulary_limit;
  j["threshold_mode"] = threshold_mode_name(config.threshold_mode);
  j["model"] = nlohmann::ordered_json::parse(config_to_json(config.model));
  return j.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  ExperimentConfig config;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.contains("assertions")) config.assertions_path = j["assertions"].get<std::string>();
    if (j.contains("embeddings")) config.embeddings_path = j["embeddings"].get<std::string>();
    if (j.contains("output_dir")) config.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("language")) config.language = j["language"].get<std::string>();
    if (j.contains("source_filter")) {
      config.source_filter = j["source_filter"].get<std::string>();
    }
    if (j.contains("setting")) config.setting = parse_setting(j["setting"].get<std::string>());
    if (j.contains("min_count")) config.min_count = j["min_count"].get<size_t>();
    if (j.contains("dataset_seed")) config.dataset_seed = j["dataset_seed"].get<uint64_t>();
    if (j.contains("seeds")) config.seeds = j["seeds"].get<std::vector<uint64_t>>();
    if (j.contains("vocabulary_limit")) {
      config.vocabulary_limit = j["vocabulary_limit"].get<size_t>();
    }
    if (j.contains("threshold_mode")) {
      config.threshold_mode = parse_threshold_mode(j["threshold_mode"].get<std::string>());
    }
    if (j.contains("model")) config.model = config_from_json(j["model"].dump());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed experiment config: ") + e.what());
  }
  if (config.seeds.empty()) {
    fail(ErrorKind::InvalidArgument, "experiment config needs at least one seed");
  }
  return config;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return experiment_config_from_json(read_file(path));
}

std::string manifest_to_json(const Manifest& manifest, const ExperimentConfig& config) {
  nlohmann::ordered_json artifacts = nlohmann::ordered_json::array();
  for (const ManifestEntry& entry : manifest.entries) {
    artifacts.push_back(
        {{"path", entry.path}, {"bytes", entry.bytes}, {"sha256", entry.sha256}});
  }
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(experiment_config_to_json(config));
  j["artifacts"] = std::move(artifacts);
  return j.dump(2) + "\n";
}

IngestStats run_ingest(const std::string& assertions_path, const std::string& embeddings_path,
                       const std::string& language, const std::string& source_filter,
                       size_t vocabulary_limit, const std::string& out_triples,
                       const std::string& out_stats) {
  std::ifstream in(assertions_path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open assertion dump: " + assertions_path);

  IngestStats stats;
  std::vector<Triple> raw = parse_assertions(in, language, source_filter, &stats.parse);
  EmbeddingStore store = load_embeddings(embeddings_path, as_limit(vocabulary_limit));
  std::vector<Triple> kept = filter_by_vocabulary(raw, store_vocabulary(store), &stats);

  ensure_parent(out_triples);
  write_triples_tsv(out_triples, kept);
  ensure_parent(out_stats);
  write_file(out_stats, stats.to_json());
  return stats;
}

DatasetBundle run_build_dataset(const std::string& triples_path, Setting setting,
                                size_t min_count, uint64_t seed, const std::string& out_dir) {
  std::vector<Triple> triples = read_triples_tsv(triples_path);
  std::vector<std::string> targets = select_target_relations(triples, min_count);
  if (targets.empty()) {
    fail(ErrorKind::InvalidArgument,
         "no relation has more than " + std::to_string(min_count) + " triples");
  }

  size_t n_min = 0;
  std::vector<RelationSplits> splits = downsample_and_split(triples, targets, seed, &n_min);
  SplitInstances balanced = merge_multilabels(splits);

  std::vector<Instance> other;
  std::vector<Instance> random_instances;
  if (setting != Setting::CW) {
    std::vector<Triple> balanced_triples;
    for (const RelationSplits& rs : splits) {
      balanced_triples.insert(balanced_triples.end(), rs.test.begin(), rs.test.end());
      balanced_triples.insert(balanced_triples.end(), rs.dev.begin(), rs.dev.end());
      balanced_triples.insert(balanced_triples.end(), rs.train.begin(), rs.train.end());
    }
    PairIndex balanced_pairs(balanced_triples);
    PairIndex full_store(triples);
    size_t class_size = n_min - n_min % 2;

    if (setting == Setting::OW2) {
      other = build_other_class(triples, low_frequency_relations(), class_size, seed,
                                balanced_pairs);
    }
    random_instances = build_random_class(balanced_triples, class_size, seed, full_store);
  }

  DatasetBundle bundle = assemble_dataset(setting, targets, balanced, std::move(other),
                                          std::move(random_instances), seed, n_min);
  fs::create_directories(out_dir);
  save_bundle(out_dir, bundle);
  return bundle;
}

TrainLog run_train(const std::string& bundle_dir, const std::string& embeddings_path,
                   ModelConfig config, size_t vocabulary_limit,
                   const std::string& out_checkpoint, const std::string& out_log) {
  DatasetBundle bundle = load_bundle(bundle_dir);
  EmbeddingStore store = load_embeddings(embeddings_path, as_limit(vocabulary_limit));
  TrainResult result = train_model(bundle, store, config);

  ensure_parent(out_checkpoint);
  save_checkpoint(out_checkpoint, result.params);
  ensure_parent(out_log);
  write_file(out_log, train_log_csv(result.log));
  return result.log;
}

ThresholdSet run_tune(const std::string& checkpoint_path, const std::string& bundle_dir,
                      ThresholdMode mode, const std::string& out_thresholds) {
  ModelParameters params = load_checkpoint(checkpoint_path);
  DatasetBundle bundle = load_bundle(bundle_dir);
  if (params.inventory != bundle.inventory) {
    fail(ErrorKind::InvalidArgument, "checkpoint inventory differs from the dataset bundle");
  }

  std::vector<std::vector<double>> probs;
  std::vector<std::vector<std::string>> gold;
  probs.reserve(bundle.dev.size());
  gold.reserve(bundle.dev.size());
  for (const Instance& inst : bundle.dev) {
    Eigen::VectorXd p = forward_probabilities(params, inst);
    probs.emplace_back(p.data(), p.data() + p.size());
    gold.push_back(inst.labels);
  }

  ThresholdSet set = tune_thresholds(probs, gold, params.inventory, mode);
  ensure_parent(out_thresholds);
  save_thresholds(out_thresholds, set);
  return set;
}

EvaluationReport run_evaluate(const std::string& checkpoint_path, const std::string& bundle_dir,
                              const std::string& thresholds_path, const std::string& out_report,
                              const std::string& out_table) {
  ModelParameters params = load_checkpoint(checkpoint_path);
  DatasetBundle bundle = load_bundle(bundle_dir);
  if (params.inventory != bundle.inventory) {
    fail(ErrorKind::InvalidArgument, "checkpoint inventory differs from the dataset bundle");
  }
  ThresholdSet thresholds = load_thresholds(thresholds_path);

  PredictionResult predictions = predict(bundle.test, params, thresholds);
  std::vector<std::vector<std::string>> gold;
  gold.reserve(bundle.test.size());
  for (const Instance& inst : bundle.test) gold.push_back(inst.labels);

  EvaluationReport report = evaluate(predictions.labels, gold, params.inventory);
  report.setting = setting_name(bundle.setting);
  report.model_id = model_label(params.config, thresholds.mode);
  report.seed = params.config.seed;

  ensure_parent(out_report);
  save_report(out_report, report);
  ensure_parent(out_table);
  write_file(out_table, render_table_text({report}));
  return report;
}

void run_analyze_bundle(const std::string& bundle_dir, const std::string& out_dir) {
  DatasetBundle bundle = load_bundle(bundle_dir);
  std::vector<Instance> all;
  all.reserve(bundle.train.size() + bundle.dev.size() + bundle.test.size());
  all.insert(all.end(), bundle.train.begin(), bundle.train.end());
  all.insert(all.end(), bundle.dev.begin(), bundle.dev.end());
  all.insert(all.end(), bundle.test.begin(), bundle.test.end());

  std::vector<RelationStats> stats = relation_statistics(all, bundle.inventory);
  CooccurrenceMatrix cooc = cooccurrence_matrix(all, bundle.inventory);

  fs::create_directories(out_dir);
  fs::path dir(out_dir);
  write_file((dir / "stats.csv").string(), stats_to_csv(stats));
  write_file((dir / "stats.json").string(), stats_to_json(stats));
  write_file((dir / "cooccurrence.csv").string(), cooccurrence_to_csv(cooc));
  write_file((dir / "cooccurrence.json").string(), cooccurrence_to_json(cooc));
  write_file((dir / "histogram.csv").string(), histogram_to_csv(cooc));
}

void run_annotate_sample(const std::string& bundle_dir, size_t n, uint64_t seed,
                         const std::string& out_sheet, const std::string& out_items) {
  DatasetBundle bundle = load_bundle(bundle_dir);
  std::vector<std::string> relations;
  for (const std::string& relation : bundle.inventory) {
    if (relation != kOtherLabel && relation != kRandomLabel) relations.push_back(relation);
  }
  std::vector<AnnotationItem> items = sample_candidates(bundle.test, relations, n, seed);
  ensure_parent(out_sheet);
  write_file(out_sheet, sheet_csv(items));
  ensure_parent(out_items);
  write_file(out_items, items_to_json(items));
}

MergeResult run_annotate_merge(const std::string& items_path, const std::string& first_path,
                               const std::string& second_path,
                               const std::string& adjudicator_path, const std::string& out_json) {
  std::vector<AnnotationItem> items = items_from_json(read_file(items_path));
  std::map<size_t, Response> first = parse_responses(read_file(first_path));
  std::map<size_t, Response> second = parse_responses(read_file(second_path));
  std::map<size_t, Response> adjudicator;
  if (!adjudicator_path.empty()) adjudicator = parse_responses(read_file(adjudicator_path));

  MergeResult result = agreement_and_adjudicate(items, first, second, adjudicator);
  ensure_parent(out_json);
  write_file(out_json, merge_to_json(result));
  return result;
}

namespace {

// Hashes and lists every artifact a run produces.
class ArtifactLog {
 public:
  explicit ArtifactLog(std::string root) : root_(std::move(root)) {}

  std::string path_of(const std::string& relative) const {
    return (fs::path(root_) / relative).string();
  }

  void write(const std::string& relative, std::string_view content) {
    std::string full = path_of(relative);
    ensure_parent(full);
    write_file(full, content);
    record(relative, std::string(content));
  }

  // Lists a file produced by a stage runner or an earlier run.
  void note(const std::string& relative) { record(relative, read_file(path_of(relative))); }

  bool exists(const std::string& relative) const { return fs::exists(path_of(relative)); }

  Manifest manifest() const {
    Manifest m;
    m.entries = entries_;
    std::sort(m.entries.begin(), m.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
    return m;
  }

 private:
  void record(const std::string& relative, const std::string& content) {
    entries_.push_back({relative, content.size(), sha256_hex(content)});
  }

  std::string root_;
  std::vector<ManifestEntry> entries_;
};

template <typename Fn>
void stage(const ArtifactLog& log, const ExperimentConfig& config, const std::string& name,
           Fn&& body) {
  try {
    body();
  } catch (const Error& e) {
    write_file((fs::path(config.output_dir) / "manifest.partial.json").string(),
               manifest_to_json(log.manifest(), config));
    throw Error(e.kind(), "stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    write_file((fs::path(config.output_dir) / "manifest.partial.json").string(),
               manifest_to_json(log.manifest(), config));
    throw Error(ErrorKind::Internal, "stage " + name + ": " + e.what());
  }
}

}  // namespace

Manifest run_experiment(const ExperimentConfig& config) {
  if (config.seeds.empty()) fail(ErrorKind::InvalidArgument, "no seeds configured");
  if (config.assertions_path.empty() || config.embeddings_path.empty() ||
      config.output_dir.empty()) {
    fail(ErrorKind::InvalidArgument, "experiment config needs assertion, embedding and output paths");
  }
  fs::create_directories(config.output_dir);
  ArtifactLog log(config.output_dir);

  stage(log, config, "ingest", [&] {
    if (!log.exists("cln.tsv") || !log.exists("ingest_stats.json")) {
      run_ingest(config.assertions_path, config.embeddings_path, config.language,
                 config.source_filter, config.vocabulary_limit, log.path_of("cln.tsv"),
                 log.path_of("ingest_stats.json"));
    }
    log.note("cln.tsv");
    log.note("ingest_stats.json");
  });

  const std::vector<std::string> bundle_files = {"dataset/manifest.json", "dataset/train.jsonl",
                                                 "dataset/dev.jsonl", "dataset/test.jsonl"};
  stage(log, config, "dataset", [&] {
    bool intact = true;
    for (const std::string& f : bundle_files) intact = intact && log.exists(f);
    if (!intact) {
      run_build_dataset(log.path_of("cln.tsv"), config.setting, config.min_count,
                        config.dataset_seed, log.path_of("dataset"));
    }
    for (const std::string& f : bundle_files) log.note(f);
  });

  std::vector<std::string> report_files;
  for (uint64_t seed : config.seeds) {
    std::string dir = "models/seed" + std::to_string(seed);
    std::string checkpoint = dir + "/model.ck";
    std::string train_log = dir + "/train_log.csv";
    std::string thresholds = dir + "/thresholds.json";
    std::string report = dir + "/report.json";
    std::string table = dir + "/table.txt";
    report_files.push_back(report);

    stage(log, config, "train:" + std::to_string(seed), [&] {
      if (!log.exists(checkpoint) || !log.exists(train_log)) {
        ModelConfig model = config.model;
        model.seed = seed;
        run_train(log.path_of("dataset"), config.embeddings_path, model,
                  config.vocabulary_limit, log.path_of(checkpoint), log.path_of(train_log));
      }
      log.note(checkpoint);
      log.note(train_log);
    });

    stage(log, config, "tune:" + std::to_string(seed), [&] {
      if (!log.exists(thresholds)) {
        run_tune(log.path_of(checkpoint), log.path_of("dataset"), config.threshold_mode,
                 log.path_of(thresholds));
      }
      log.note(thresholds);
    });

    stage(log, config, "evaluate:" + std::to_string(seed), [&] {
      if (!log.exists(report) || !log.exists(table)) {
        run_evaluate(log.path_of(checkpoint), log.path_of("dataset"), log.path_of(thresholds),
                     log.path_of(report), log.path_of(table));
      }
      log.note(report);
      log.note(table);
    });
  }

  stage(log, config, "aggregate", [&] {
    std::vector<EvaluationReport> reports;
    reports.reserve(report_files.size());
    for (const std::string& f : report_files) reports.push_back(load_report(log.path_of(f)));
    EvaluationReport mean = aggregate_runs(reports);
    log.write("report_mean.json", report_to_json(mean));
    log.write("table.txt", render_table_text({mean}));
    log.write("table.csv", render_table_csv({mean}));
  });

  stage(log, config, "analysis", [&] {
    DatasetBundle bundle = load_bundle(log.path_of("dataset"));
    std::vector<Instance> all;
    all.reserve(bundle.train.size() + bundle.dev.size() + bundle.test.size());
    all.insert(all.end(), bundle.train.begin(), bundle.train.end());
    all.insert(all.end(), bundle.dev.begin(), bundle.dev.end());
    all.insert(all.end(), bundle.test.begin(), bundle.test.end());

    std::vector<RelationStats> stats = relation_statistics(all, bundle.inventory);
    CooccurrenceMatrix cooc = cooccurrence_matrix(all, bundle.inventory);
    log.write("analysis/stats.csv", stats_to_csv(stats));
    log.write("analysis/stats.json", stats_to_json(stats));
    log.write("analysis/cooccurrence.csv", cooccurrence_to_csv(cooc));
    log.write("analysis/cooccurrence.json", cooccurrence_to_json(cooc));
    log.write("analysis/histogram.csv", histogram_to_csv(cooc));

    EvaluationReport mean = load_report(log.path_of("report_mean.json"));
    std::vector<NamedSeries> series(3);
    series[0].name = "f1";
    series[1].name = "multilabel_pct";
    series[2].name = "avg_words";
    for (size_t i = 0; i < bundle.inventory.size(); ++i) {
      series[0].values.push_back(mean.per_relation[i].f1);
      series[1].values.push_back(stats[i].multilabel_pct);
      series[2].values.push_back(stats[i].avg_words);
    }
    std::vector<NamedSeries> profile = scaled_profile(series);
    log.write("analysis/profile.csv", profile_to_csv(profile));
    log.write("analysis/profile.json", profile_to_json(profile));
  });

  Manifest manifest = log.manifest();
  write_file((fs::path(config.output_dir) / "manifest.json").string(),
             manifest_to_json(manifest, config));
  fs::remove(fs::path(config.output_dir) / "manifest.partial.json");
  return manifest;
}

}  // namespace cnrel
