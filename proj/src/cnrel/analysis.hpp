#pragma once

#include <string>
#include <vector>

#include "cnrel/eval.hpp"
#include "cnrel/types.hpp"

namespace cnrel {

// Aggregate row name used by relation_statistics.
inline constexpr const char* kAllRow = "All";

struct RelationStats {
  std::string relation;
  double multiword_pct = 0.0;   // instances with at least one multi-word concept
  double avg_words = 0.0;       // mean tokens per concept
  double multilabel_pct = 0.0;  // instances carrying more than one label
  size_t instances = 0;
};

// Per-relation rows in inventory order plus a final aggregate row. The
// aggregate is the instance-weighted combination of the emitted rows.
// For triples, a row's multilabel share counts triples whose concept pair is
// asserted under more than one relation anywhere in the input; for instances
// it counts label sets larger than one. Relations absent from the input get
// an all-zero row.
std::vector<RelationStats> relation_statistics(const std::vector<Triple>& triples,
                                               const std::vector<std::string>& inventory);
std::vector<RelationStats> relation_statistics(const std::vector<Instance>& instances,
                                               const std::vector<std::string>& inventory);

std::string stats_to_csv(const std::vector<RelationStats>& rows);
std::string stats_to_json(const std::vector<RelationStats>& rows);

struct CooccurrenceMatrix {
  std::vector<std::string> inventory;
  std::vector<std::vector<size_t>> counts;  // symmetric, zero diagonal
  std::vector<size_t> histogram;            // histogram[k] = instances with k labels
};

CooccurrenceMatrix cooccurrence_matrix(const std::vector<Instance>& instances,
                                       const std::vector<std::string>& inventory);

// Square layout: header row and first column carry the inventory.
std::string cooccurrence_to_csv(const CooccurrenceMatrix& matrix);
std::string histogram_to_csv(const CooccurrenceMatrix& matrix);
std::string cooccurrence_to_json(const CooccurrenceMatrix& matrix);

// Sample Pearson correlation. Requires equal lengths of at least two and
// nonzero variance on both sides.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct NamedSeries {
  std::string name;
  std::vector<double> values;
};

// Min-max scales every series onto [0, 15]; constant series map to zeros.
std::vector<NamedSeries> scaled_profile(const std::vector<NamedSeries>& series);

std::string profile_to_csv(const std::vector<NamedSeries>& series);
std::string profile_to_json(const std::vector<NamedSeries>& series);

struct DeltaReport {
  std::string label_a;
  std::string label_b;
  std::vector<std::string> inventory;
  std::vector<double> deltas;  // per-relation F1 of a minus b
  double weighted_delta = 0.0;
};

// Signed per-relation F1 differences between two reports over one inventory.
DeltaReport delta_report(const EvaluationReport& a, const EvaluationReport& b);

std::string delta_to_csv(const DeltaReport& report);
std::string delta_to_json(const DeltaReport& report);

// Numeric table keyed by a leading "relation" column.
struct RelationTable {
  std::vector<std::string> relations;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // one row per relation

  bool has(const std::string& relation) const;
  double value(const std::string& relation, const std::string& column) const;
  size_t column_index(const std::string& column) const;
};

RelationTable parse_relation_table(const std::string& text);
RelationTable load_relation_table(const std::string& path);

struct CorrelationResult {
  double coefficient = 0.0;
  size_t pairs = 0;
};

// Pearson over the relations the two tables share, in x-table row order.
// The aggregate row never participates; Other and Random rows participate
// only when include_ow_classes is set.
CorrelationResult correlate_columns(const RelationTable& x_table, const std::string& x_column,
                                    const RelationTable& y_table, const std::string& y_column,
                                    bool include_ow_classes);

struct CorrelationEntry {
  std::string name;
  size_t pairs = 0;
  double coefficient = 0.0;
};

// The three fixture-driven correlations. The score table needs columns
// ff_tuned, ffrnn_tuned and ffrnn_global; the statistics table needs
// multilabel_pct and avg_words.
std::vector<CorrelationEntry> correlation_report(const RelationTable& scores,
                                                 const RelationTable& stats,
                                                 bool include_ow_classes);

std::string correlations_to_csv(const std::vector<CorrelationEntry>& entries);
std::string correlations_to_json(const std::vector<CorrelationEntry>& entries);

}  // namespace cnrel
