#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cnrel/types.hpp"

namespace cnrel {

struct RelationScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double support = 0.0;  // gold positives; fractional after aggregation
};

struct EvaluationReport {
  std::vector<std::string> inventory;
  std::vector<RelationScore> per_relation;  // aligned with inventory
  double weighted_f1 = 0.0;
  std::string setting;
  std::string model_id;
  uint64_t seed = 0;
  size_t runs = 1;

  const RelationScore& score(const std::string& relation) const;
};

// Treats each relation as one binary decision per instance. Scores with a
// zero denominator are 0; weighted F1 weights by gold support.
EvaluationReport evaluate(const std::vector<std::vector<std::string>>& predicted,
                          const std::vector<std::vector<std::string>>& gold,
                          const std::vector<std::string>& inventory);

// Arithmetic mean of every metric across runs of one configuration.
EvaluationReport aggregate_runs(const std::vector<EvaluationReport>& reports);

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);
void save_report(const std::string& path, const EvaluationReport& report);
EvaluationReport load_report(const std::string& path);

// Relation rows, one column per report, weighted F1 as the last row.
std::string render_table_text(const std::vector<EvaluationReport>& reports);
std::string render_table_csv(const std::vector<EvaluationReport>& reports);

}  // namespace cnrel
