#ifndef CNREL_H
#define CNREL_H

/* C interface to the relation-classification pipeline. Every call is
 * path-driven and stateless except the model handle, which keeps a loaded
 * checkpoint in memory for repeated queries. All functions return a status
 * code; cnrel_last_error() describes the most recent failure on the calling
 * thread. */

#include <stddef.h>

#if defined(__GNUC__)
#define CNREL_API __attribute__((visibility("default")))
#else
#define CNREL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cnrel_status {
  CNREL_OK = 0,
  CNREL_ERR_INVALID_ARGUMENT = 1,
  CNREL_ERR_IO = 2,
  CNREL_ERR_FORMAT = 3,
  CNREL_ERR_GENERATION = 4,
  CNREL_ERR_NUMERIC = 5,
  CNREL_ERR_INTERNAL = 6
} cnrel_status;

CNREL_API const char* cnrel_version(void);

/* Message for the last failing call on this thread; empty string when the
 * last call succeeded. The pointer stays valid until the next call. */
CNREL_API const char* cnrel_last_error(void);

/* Frees strings returned through out parameters. */
CNREL_API void cnrel_string_free(char* text);

/* Parses a raw assertion dump, keeps `language` rows matching
 * `source_filter`, filters against the embedding vocabulary and writes the
 * cleaned triple store plus a statistics JSON. vocabulary_limit of 0 loads
 * the whole embedding file. */
CNREL_API cnrel_status cnrel_ingest(const char* assertions_path, const char* embeddings_path,
                                    const char* language, const char* source_filter,
                                    size_t vocabulary_limit, const char* out_triples,
                                    const char* out_stats);

/* Builds the balanced multi-label dataset for setting "CW", "OW1" or "OW2"
 * under out_dir (train/dev/test.jsonl + manifest.json). */
CNREL_API cnrel_status cnrel_build_dataset(const char* triples_path, const char* setting,
                                           size_t min_count, unsigned long long seed,
                                           const char* out_dir);

/* Trains on a dataset bundle. model_config_json may be NULL for defaults;
 * seed overrides the config seed. Writes a checkpoint and an epoch log. */
CNREL_API cnrel_status cnrel_train(const char* bundle_dir, const char* embeddings_path,
                                   const char* model_config_json, unsigned long long seed,
                                   size_t vocabulary_limit, const char* out_checkpoint,
                                   const char* out_log);

/* Tunes decision thresholds on the bundle's dev split; mode is
 * "per_relation" or "global". */
CNREL_API cnrel_status cnrel_tune(const char* checkpoint_path, const char* bundle_dir,
                                  const char* mode, const char* out_thresholds);

/* Scores the bundle's test split and writes a report JSON and a rendered
 * text table. */
CNREL_API cnrel_status cnrel_evaluate(const char* checkpoint_path, const char* bundle_dir,
                                      const char* thresholds_path, const char* out_report,
                                      const char* out_table);

/* Dataset reports: relation statistics, co-occurrence matrix and
 * label-multiplicity histogram, written under out_dir. */
CNREL_API cnrel_status cnrel_analyze_bundle(const char* bundle_dir, const char* out_dir);

/* Correlation report over two relation-keyed CSV tables (a score table and
 * a statistics table). include_ow_classes of 0 drops Other/Random rows. */
CNREL_API cnrel_status cnrel_correlations(const char* scores_csv, const char* stats_csv,
                                          int include_ow_classes, const char* out_csv,
                                          const char* out_json);

/* Per-relation F1 deltas between two evaluation reports (a minus b). */
CNREL_API cnrel_status cnrel_delta(const char* report_a, const char* report_b,
                                   const char* out_csv, const char* out_json);

/* Samples annotation items from the bundle's test split: a blinded
 * annotator sheet (CSV) and a full item list (JSON) with gold labels. */
CNREL_API cnrel_status cnrel_annotate_sample(const char* bundle_dir, size_t count,
                                             unsigned long long seed, const char* out_sheet,
                                             const char* out_items);

/* Merges two filled annotator sheets; adjudicator_path may be NULL when the
 * annotators agree everywhere. Writes agreement statistics and finals. */
CNREL_API cnrel_status cnrel_annotate_merge(const char* items_path, const char* first_path,
                                            const char* second_path,
                                            const char* adjudicator_path, const char* out_json);

/* Runs the whole experiment described by a config JSON: ingest, dataset,
 * one train/tune/evaluate pass per seed, aggregation, analysis reports, and
 * a manifest hashing every artifact. */
CNREL_API cnrel_status cnrel_run(const char* config_path);

/* Loaded model checkpoint. */
typedef struct cnrel_model cnrel_model;

CNREL_API cnrel_status cnrel_model_load(const char* checkpoint_path, cnrel_model** out_model);
CNREL_API void cnrel_model_free(cnrel_model* model);
CNREL_API cnrel_status cnrel_model_label_count(const cnrel_model* model, size_t* out_count);

/* Classifies one concept pair. thresholds_path may be NULL for a uniform
 * 0.5 cutoff. On success *out_json holds {"labels": [...],
 * "probabilities": {...}}; release it with cnrel_string_free. */
CNREL_API cnrel_status cnrel_model_predict(const cnrel_model* model, const char* head,
                                           const char* tail, const char* thresholds_path,
                                           char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* CNREL_H */
