#include "cnrel.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "cnrel/analysis.hpp"
#include "cnrel/common.hpp"
#include "cnrel/model.hpp"
#include "cnrel/pipeline.hpp"

namespace {

thread_local std::string g_last_error;

cnrel_status status_of(cnrel::ErrorKind kind) {
  switch (kind) {
    case cnrel::ErrorKind::InvalidArgument: return CNREL_ERR_INVALID_ARGUMENT;
    case cnrel::ErrorKind::Io: return CNREL_ERR_IO;
    case cnrel::ErrorKind::Format: return CNREL_ERR_FORMAT;
    case cnrel::ErrorKind::Generation: return CNREL_ERR_GENERATION;
    case cnrel::ErrorKind::Numeric: return CNREL_ERR_NUMERIC;
    default: return CNREL_ERR_INTERNAL;
  }
}

template <typename Fn>
cnrel_status guarded(Fn&& body) {
  try {
    body();
    g_last_error.clear();
    return CNREL_OK;
  } catch (const cnrel::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CNREL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return CNREL_ERR_INTERNAL;
  }
}

std::string required(const char* value, const char* name) {
  if (value == nullptr || *value == '\0') {
    cnrel::fail(cnrel::ErrorKind::InvalidArgument, std::string(name) + " must be set");
  }
  return value;
}

char* copy_out(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

struct cnrel_model {
  cnrel::ModelParameters params;
};

extern "C" {

const char* cnrel_version(void) { return "1.0.0"; }

const char* cnrel_last_error(void) { return g_last_error.c_str(); }

void cnrel_string_free(char* text) { std::free(text); }

cnrel_status cnrel_ingest(const char* assertions_path, const char* embeddings_path,
                          const char* language, const char* source_filter,
                          size_t vocabulary_limit, const char* out_triples,
                          const char* out_stats) {
  return guarded([&] {
    cnrel::run_ingest(required(assertions_path, "assertions_path"),
                      required(embeddings_path, "embeddings_path"),
                      required(language, "language"),
                      source_filter == nullptr ? "" : source_filter, vocabulary_limit,
                      required(out_triples, "out_triples"), required(out_stats, "out_stats"));
  });
}

cnrel_status cnrel_build_dataset(const char* triples_path, const char* setting, size_t min_count,
                                 unsigned long long seed, const char* out_dir) {
  return guarded([&] {
    cnrel::run_build_dataset(required(triples_path, "triples_path"),
                             cnrel::parse_setting(required(setting, "setting")), min_count, seed,
                             required(out_dir, "out_dir"));
  });
}

cnrel_status cnrel_train(const char* bundle_dir, const char* embeddings_path,
                         const char* model_config_json, unsigned long long seed,
                         size_t vocabulary_limit, const char* out_checkpoint,
                         const char* out_log) {
  return guarded([&] {
    cnrel::ModelConfig config;
    if (model_config_json != nullptr && *model_config_json != '\0') {
      config = cnrel::config_from_json(cnrel::read_file(model_config_json));
    }
    config.seed = seed;
    cnrel::run_train(required(bundle_dir, "bundle_dir"),
                     required(embeddings_path, "embeddings_path"), config, vocabulary_limit,
                     required(out_checkpoint, "out_checkpoint"), required(out_log, "out_log"));
  });
}

cnrel_status cnrel_tune(const char* checkpoint_path, const char* bundle_dir, const char* mode,
                        const char* out_thresholds) {
  return guarded([&] {
    cnrel::run_tune(required(checkpoint_path, "checkpoint_path"),
                    required(bundle_dir, "bundle_dir"),
                    cnrel::parse_threshold_mode(required(mode, "mode")),
                    required(out_thresholds, "out_thresholds"));
  });
}

cnrel_status cnrel_evaluate(const char* checkpoint_path, const char* bundle_dir,
                            const char* thresholds_path, const char* out_report,
                            const char* out_table) {
  return guarded([&] {
    cnrel::run_evaluate(required(checkpoint_path, "checkpoint_path"),
                        required(bundle_dir, "bundle_dir"),
                        required(thresholds_path, "thresholds_path"),
                        required(out_report, "out_report"), required(out_table, "out_table"));
  });
}

cnrel_status cnrel_analyze_bundle(const char* bundle_dir, const char* out_dir) {
  return guarded([&] {
    cnrel::run_analyze_bundle(required(bundle_dir, "bundle_dir"), required(out_dir, "out_dir"));
  });
}

cnrel_status cnrel_correlations(const char* scores_csv, const char* stats_csv,
                                int include_ow_classes, const char* out_csv,
                                const char* out_json) {
  return guarded([&] {
    cnrel::RelationTable scores =
        cnrel::load_relation_table(required(scores_csv, "scores_csv"));
    cnrel::RelationTable stats = cnrel::load_relation_table(required(stats_csv, "stats_csv"));
    std::vector<cnrel::CorrelationEntry> entries =
        cnrel::correlation_report(scores, stats, include_ow_classes != 0);
    cnrel::write_file(required(out_csv, "out_csv"), cnrel::correlations_to_csv(entries));
    cnrel::write_file(required(out_json, "out_json"), cnrel::correlations_to_json(entries));
  });
}

cnrel_status cnrel_delta(const char* report_a, const char* report_b, const char* out_csv,
                         const char* out_json) {
  return guarded([&] {
    cnrel::EvaluationReport a = cnrel::load_report(required(report_a, "report_a"));
    cnrel::EvaluationReport b = cnrel::load_report(required(report_b, "report_b"));
    cnrel::DeltaReport delta = cnrel::delta_report(a, b);
    cnrel::write_file(required(out_csv, "out_csv"), cnrel::delta_to_csv(delta));
    cnrel::write_file(required(out_json, "out_json"), cnrel::delta_to_json(delta));
  });
}

cnrel_status cnrel_annotate_sample(const char* bundle_dir, size_t count, unsigned long long seed,
                                   const char* out_sheet, const char* out_items) {
  return guarded([&] {
    cnrel::run_annotate_sample(required(bundle_dir, "bundle_dir"), count, seed,
                               required(out_sheet, "out_sheet"),
                               required(out_items, "out_items"));
  });
}

cnrel_status cnrel_annotate_merge(const char* items_path, const char* first_path,
                                  const char* second_path, const char* adjudicator_path,
                                  const char* out_json) {
  return guarded([&] {
    cnrel::run_annotate_merge(required(items_path, "items_path"),
                              required(first_path, "first_path"),
                              required(second_path, "second_path"),
                              adjudicator_path == nullptr ? "" : adjudicator_path,
                              required(out_json, "out_json"));
  });
}

cnrel_status cnrel_run(const char* config_path) {
  return guarded([&] {
    cnrel::run_experiment(cnrel::load_experiment_config(required(config_path, "config_path")));
  });
}

cnrel_status cnrel_model_load(const char* checkpoint_path, cnrel_model** out_model) {
  return guarded([&] {
    if (out_model == nullptr) {
      cnrel::fail(cnrel::ErrorKind::InvalidArgument, "out_model must be set");
    }
    *out_model = new cnrel_model{
        cnrel::load_checkpoint(required(checkpoint_path, "checkpoint_path"))};
  });
}

void cnrel_model_free(cnrel_model* model) { delete model; }

cnrel_status cnrel_model_label_count(const cnrel_model* model, size_t* out_count) {
  return guarded([&] {
    if (model == nullptr || out_count == nullptr) {
      cnrel::fail(cnrel::ErrorKind::InvalidArgument, "model and out_count must be set");
    }
    *out_count = model->params.inventory.size();
  });
}

cnrel_status cnrel_model_predict(const cnrel_model* model, const char* head, const char* tail,
                                 const char* thresholds_path, char** out_json) {
  return guarded([&] {
    if (model == nullptr || out_json == nullptr) {
      cnrel::fail(cnrel::ErrorKind::InvalidArgument, "model and out_json must be set");
    }
    cnrel::Instance instance;
    instance.head = cnrel::normalize_concept(required(head, "head"));
    instance.tail = cnrel::normalize_concept(required(tail, "tail"));

    cnrel::ThresholdSet thresholds =
        (thresholds_path == nullptr || *thresholds_path == '\0')
            ? cnrel::ThresholdSet::uniform(model->params.inventory)
            : cnrel::load_thresholds(thresholds_path);

    cnrel::PredictionResult result = cnrel::predict({instance}, model->params, thresholds);

    nlohmann::ordered_json probabilities;
    for (size_t k = 0; k < model->params.inventory.size(); ++k) {
      probabilities[model->params.inventory[k]] = result.probabilities[0][k];
    }
    nlohmann::ordered_json j;
    j["labels"] = result.labels[0];
    j["probabilities"] = std::move(probabilities);
    *out_json = copy_out(j.dump(2));
  });
}

}  // extern "C"
