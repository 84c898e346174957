// Command-line front end over the cnrel C API. Exit codes: 0 success,
// 1 usage error, 2 stage failure.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "cnrel.h"

namespace {

int finish(cnrel_status status) {
  if (status == CNREL_OK) return 0;
  std::fprintf(stderr, "error: %s\n", cnrel_last_error());
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ConceptNet relation classification pipeline"};
  app.require_subcommand(1);

  cnrel_status status = CNREL_OK;

  // ingest
  std::string assertions, embeddings, language = "en", source_filter = "omcs";
  std::string out_triples, out_stats;
  size_t limit = 0;
  auto* ingest = app.add_subcommand("ingest", "Parse and clean a raw assertion dump");
  ingest->add_option("--assertions", assertions, "Raw assertion dump (TSV)")->required();
  ingest->add_option("--embeddings", embeddings, "Embedding file for the vocabulary filter")
      ->required();
  ingest->add_option("--language", language, "Concept language code");
  ingest->add_option("--source-filter", source_filter,
                     "Keep rows whose metadata contains this text (empty keeps all)");
  ingest->add_option("--limit", limit, "Cap on loaded embedding rows (0 = all)");
  ingest->add_option("--out-triples", out_triples, "Cleaned triple store path")->required();
  ingest->add_option("--out-stats", out_stats, "Ingest statistics JSON path")->required();
  ingest->callback([&] {
    status = cnrel_ingest(assertions.c_str(), embeddings.c_str(), language.c_str(),
                          source_filter.c_str(), limit, out_triples.c_str(), out_stats.c_str());
  });

  // build-dataset
  std::string triples, setting = "CW", dataset_out;
  size_t min_count = 2000;
  unsigned long long seed = 1;
  auto* build = app.add_subcommand("build-dataset", "Build a balanced multi-label dataset");
  build->add_option("--triples", triples, "Cleaned triple store (TSV)")->required();
  build->add_option("--setting", setting, "CW, OW1 or OW2");
  build->add_option("--min-count", min_count, "Relations need more triples than this");
  build->add_option("--seed", seed, "Sampling seed");
  build->add_option("--out", dataset_out, "Bundle directory")->required();
  build->callback([&] {
    status = cnrel_build_dataset(triples.c_str(), setting.c_str(), min_count, seed,
                                 dataset_out.c_str());
  });

  // train
  std::string bundle, model_config, out_checkpoint, out_log;
  auto* train = app.add_subcommand("train", "Train the multi-label classifier");
  train->add_option("--bundle", bundle, "Dataset bundle directory")->required();
  train->add_option("--embeddings", embeddings, "Pretrained embedding file")->required();
  train->add_option("--config", model_config, "Model config JSON (defaults when omitted)");
  train->add_option("--seed", seed, "Training seed");
  train->add_option("--limit", limit, "Cap on loaded embedding rows (0 = all)");
  train->add_option("--out-checkpoint", out_checkpoint, "Checkpoint path")->required();
  train->add_option("--out-log", out_log, "Epoch log CSV path")->required();
  train->callback([&] {
    status = cnrel_train(bundle.c_str(), embeddings.c_str(),
                         model_config.empty() ? nullptr : model_config.c_str(), seed, limit,
                         out_checkpoint.c_str(), out_log.c_str());
  });

  // tune
  std::string checkpoint, mode = "per_relation", out_thresholds;
  auto* tune = app.add_subcommand("tune", "Tune decision thresholds on the dev split");
  tune->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  tune->add_option("--bundle", bundle, "Dataset bundle directory")->required();
  tune->add_option("--mode", mode, "per_relation or global");
  tune->add_option("--out", out_thresholds, "Threshold JSON path")->required();
  tune->callback([&] {
    status = cnrel_tune(checkpoint.c_str(), bundle.c_str(), mode.c_str(),
                        out_thresholds.c_str());
  });

  // evaluate
  std::string thresholds, out_report, out_table;
  auto* evaluate = app.add_subcommand("evaluate", "Score the test split");
  evaluate->add_option("--checkpoint", checkpoint, "Trained checkpoint")->required();
  evaluate->add_option("--bundle", bundle, "Dataset bundle directory")->required();
  evaluate->add_option("--thresholds", thresholds, "Threshold JSON")->required();
  evaluate->add_option("--out-report", out_report, "Report JSON path")->required();
  evaluate->add_option("--out-table", out_table, "Rendered table path")->required();
  evaluate->callback([&] {
    status = cnrel_evaluate(checkpoint.c_str(), bundle.c_str(), thresholds.c_str(),
                            out_report.c_str(), out_table.c_str());
  });

  // analyze
  std::string analyze_out, scores_csv, stats_csv, report_a, report_b, out_csv, out_json;
  bool include_ow = false;
  auto* analyze = app.add_subcommand(
      "analyze", "Dataset statistics, fixture correlations, or report deltas");
  analyze->add_option("--bundle", bundle, "Bundle directory: emit dataset reports");
  analyze->add_option("--out", analyze_out, "Output directory for dataset reports");
  analyze->add_option("--scores", scores_csv, "Score table CSV: emit correlation report");
  analyze->add_option("--stats", stats_csv, "Statistics table CSV for the correlation report");
  analyze->add_flag("--include-ow-classes", include_ow,
                    "Keep Other/Random rows in the correlation report");
  analyze->add_option("--report-a", report_a, "Evaluation report JSON: emit deltas (a - b)");
  analyze->add_option("--report-b", report_b, "Evaluation report JSON to subtract");
  analyze->add_option("--out-csv", out_csv, "CSV output for correlations or deltas");
  analyze->add_option("--out-json", out_json, "JSON output for correlations or deltas");
  analyze->callback([&] {
    bool bundle_mode = !bundle.empty();
    bool corr_mode = !scores_csv.empty() || !stats_csv.empty();
    bool delta_mode = !report_a.empty() || !report_b.empty();
    if (bundle_mode + corr_mode + delta_mode != 1) {
      throw CLI::ValidationError(
          "analyze needs exactly one of --bundle, --scores/--stats, --report-a/--report-b");
    }
    if (bundle_mode) {
      if (analyze_out.empty()) throw CLI::ValidationError("--bundle needs --out");
      status = cnrel_analyze_bundle(bundle.c_str(), analyze_out.c_str());
      return;
    }
    if (out_csv.empty() || out_json.empty()) {
      throw CLI::ValidationError("this analyze mode needs --out-csv and --out-json");
    }
    if (corr_mode) {
      if (scores_csv.empty() || stats_csv.empty()) {
        throw CLI::ValidationError("correlations need both --scores and --stats");
      }
      status = cnrel_correlations(scores_csv.c_str(), stats_csv.c_str(), include_ow ? 1 : 0,
                                  out_csv.c_str(), out_json.c_str());
      return;
    }
    if (report_a.empty() || report_b.empty()) {
      throw CLI::ValidationError("deltas need both --report-a and --report-b");
    }
    status = cnrel_delta(report_a.c_str(), report_b.c_str(), out_csv.c_str(), out_json.c_str());
  });

  // annotate-sample
  std::string out_sheet, out_items;
  size_t count = 200;
  auto* sample = app.add_subcommand("annotate-sample", "Sample annotation candidates");
  sample->add_option("--bundle", bundle, "Dataset bundle directory")->required();
  sample->add_option("--count", count, "Number of items");
  sample->add_option("--seed", seed, "Sampling seed");
  sample->add_option("--out-sheet", out_sheet, "Blinded annotator sheet CSV")->required();
  sample->add_option("--out-items", out_items, "Item list JSON with gold labels")->required();
  sample->callback([&] {
    status = cnrel_annotate_sample(bundle.c_str(), count, seed, out_sheet.c_str(),
                                   out_items.c_str());
  });

  // annotate-merge
  std::string items, first, second, adjudicator, merge_out;
  auto* merge = app.add_subcommand("annotate-merge", "Merge filled annotator sheets");
  merge->add_option("--items", items, "Item list JSON from annotate-sample")->required();
  merge->add_option("--first", first, "First annotator's filled sheet")->required();
  merge->add_option("--second", second, "Second annotator's filled sheet")->required();
  merge->add_option("--adjudicator", adjudicator, "Adjudicator sheet for disagreements");
  merge->add_option("--out", merge_out, "Merged result JSON")->required();
  merge->callback([&] {
    status = cnrel_annotate_merge(items.c_str(), first.c_str(), second.c_str(),
                                  adjudicator.empty() ? nullptr : adjudicator.c_str(),
                                  merge_out.c_str());
  });

  // run
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the full experiment from a config JSON");
  run->add_option("--config", config_path, "Experiment config JSON")->required();
  run->callback([&] { status = cnrel_run(config_path.c_str()); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  return finish(status);
}
