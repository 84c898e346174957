#include "cnrel/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "cnrel/common.hpp"

namespace cnrel {

namespace {

// Accumulates one statistics row.
struct StatsAccum {
  size_t instances = 0;
  size_t multiword = 0;
  size_t words = 0;
  size_t concepts = 0;
  size_t multilabel = 0;

  RelationStats finish(const std::string& relation) const {
    RelationStats row;
    row.relation = relation;
    row.instances = instances;
    if (instances == 0) return row;
    row.multiword_pct = 100.0 * static_cast<double>(multiword) / static_cast<double>(instances);
    row.avg_words = static_cast<double>(words) / static_cast<double>(concepts);
    row.multilabel_pct = 100.0 * static_cast<double>(multilabel) / static_cast<double>(instances);
    return row;
  }
};

std::vector<RelationStats> finish_rows(std::vector<StatsAccum>& accums,
                                       const std::vector<std::string>& inventory) {
  std::vector<RelationStats> rows;
  rows.reserve(inventory.size() + 1);
  StatsAccum all;
  for (size_t i = 0; i < inventory.size(); ++i) {
    rows.push_back(accums[i].finish(inventory[i]));
    all.instances += accums[i].instances;
    all.multiword += accums[i].multiword;
    all.words += accums[i].words;
    all.concepts += accums[i].concepts;
    all.multilabel += accums[i].multilabel;
  }
  rows.push_back(all.finish(kAllRow));
  return rows;
}

void add_pair(StatsAccum& accum, const Concept& head, const Concept& tail, bool multilabel) {
  ++accum.instances;
  if (head.multiword() || tail.multiword()) ++accum.multiword;
  accum.words += head.tokens.size() + tail.tokens.size();
  accum.concepts += 2;
  if (multilabel) ++accum.multilabel;
}

std::unordered_map<std::string, size_t> index_of(const std::vector<std::string>& inventory) {
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < inventory.size(); ++i) index[inventory[i]] = i;
  return index;
}

std::string csv_number(double v) { return format_double(v); }

}  // namespace

std::vector<RelationStats> relation_statistics(const std::vector<Triple>& triples,
                                               const std::vector<std::string>& inventory) {
  if (triples.empty()) fail(ErrorKind::InvalidArgument, "no triples to summarize");
  if (inventory.empty()) fail(ErrorKind::InvalidArgument, "empty relation inventory");

  // relation diversity per concept pair, over the whole input
  std::unordered_map<std::string, std::pair<std::string, bool>> pair_relations;
  for (const Triple& t : triples) {
    std::string key = t.head.surface + '\t' + t.tail.surface;
    auto [it, inserted] = pair_relations.try_emplace(key, t.relation, false);
    if (!inserted && it->second.first != t.relation) it->second.second = true;
  }

  auto index = index_of(inventory);
  std::vector<StatsAccum> accums(inventory.size());
  for (const Triple& t : triples) {
    auto it = index.find(t.relation);
    if (it == index.end()) continue;
    std::string key = t.head.surface + '\t' + t.tail.surface;
    add_pair(accums[it->second], t.head, t.tail, pair_relations.at(key).second);
  }
  return finish_rows(accums, inventory);
}

std::vector<RelationStats> relation_statistics(const std::vector<Instance>& instances,
                                               const std::vector<std::string>& inventory) {
  if (instances.empty()) fail(ErrorKind::InvalidArgument, "no instances to summarize");
  if (inventory.empty()) fail(ErrorKind::InvalidArgument, "empty relation inventory");

  auto index = index_of(inventory);
  std::vector<StatsAccum> accums(inventory.size());
  for (const Instance& inst : instances) {
    bool multilabel = inst.labels.size() > 1;
    for (const std::string& label : inst.labels) {
      auto it = index.find(label);
      if (it == index.end()) continue;
      add_pair(accums[it->second], inst.head, inst.tail, multilabel);
    }
  }
  return finish_rows(accums, inventory);
}

std::string stats_to_csv(const std::vector<RelationStats>& rows) {
  std::ostringstream out;
  out << "relation,instances,multiword_pct,avg_words,multilabel_pct\n";
  for (const RelationStats& row : rows) {
    out << row.relation << ',' << row.instances << ',' << csv_number(row.multiword_pct) << ','
        << csv_number(row.avg_words) << ',' << csv_number(row.multilabel_pct) << '\n';
  }
  return out.str();
}

std::string stats_to_json(const std::vector<RelationStats>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const RelationStats& row : rows) {
    j.push_back({{"relation", row.relation},
                 {"instances", row.instances},
                 {"multiword_pct", row.multiword_pct},
                 {"avg_words", row.avg_words},
                 {"multilabel_pct", row.multilabel_pct}});
  }
  return j.dump(2) + "\n";
}

CooccurrenceMatrix cooccurrence_matrix(const std::vector<Instance>& instances,
                                       const std::vector<std::string>& inventory) {
  if (inventory.empty()) fail(ErrorKind::InvalidArgument, "empty relation inventory");
  auto index = index_of(inventory);

  CooccurrenceMatrix m;
  m.inventory = inventory;
  m.counts.assign(inventory.size(), std::vector<size_t>(inventory.size(), 0));
  for (const Instance& inst : instances) {
    size_t width = inst.labels.size();
    if (m.histogram.size() <= width) m.histogram.resize(width + 1, 0);
    ++m.histogram[width];

    std::vector<size_t> ids;
    ids.reserve(width);
    for (const std::string& label : inst.labels) {
      auto it = index.find(label);
      if (it == index.end()) {
        fail(ErrorKind::InvalidArgument, "label '" + label + "' not in the inventory");
      }
      ids.push_back(it->second);
    }
    for (size_t a = 0; a < ids.size(); ++a) {
      for (size_t b = a + 1; b < ids.size(); ++b) {
        ++m.counts[ids[a]][ids[b]];
        ++m.counts[ids[b]][ids[a]];
      }
    }
  }
  return m;
}

std::string cooccurrence_to_csv(const CooccurrenceMatrix& matrix) {
  std::ostringstream out;
  out << "relation";
  for (const std::string& r : matrix.inventory) out << ',' << r;
  out << '\n';
  for (size_t i = 0; i < matrix.inventory.size(); ++i) {
    out << matrix.inventory[i];
    for (size_t j = 0; j < matrix.inventory.size(); ++j) out << ',' << matrix.counts[i][j];
    out << '\n';
  }
  return out.str();
}

std::string histogram_to_csv(const CooccurrenceMatrix& matrix) {
  std::ostringstream out;
  out << "labels,count\n";
  for (size_t k = 0; k < matrix.histogram.size(); ++k) {
    out << k << ',' << matrix.histogram[k] << '\n';
  }
  return out.str();
}

std::string cooccurrence_to_json(const CooccurrenceMatrix& matrix) {
  nlohmann::ordered_json j;
  j["inventory"] = matrix.inventory;
  j["counts"] = matrix.counts;
  j["histogram"] = matrix.histogram;
  return j.dump(2) + "\n";
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) fail(ErrorKind::InvalidArgument, "series length mismatch");
  if (x.size() < 2) fail(ErrorKind::InvalidArgument, "correlation needs at least two points");

  double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mean_x;
    double dy = y[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fail(ErrorKind::Numeric, "correlation undefined for zero-variance series");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<NamedSeries> scaled_profile(const std::vector<NamedSeries>& series) {
  std::vector<NamedSeries> out;
  out.reserve(series.size());
  for (const NamedSeries& s : series) {
    if (s.values.empty()) fail(ErrorKind::InvalidArgument, "empty series '" + s.name + "'");
    auto [lo_it, hi_it] = std::minmax_element(s.values.begin(), s.values.end());
    double lo = *lo_it, hi = *hi_it;
    NamedSeries scaled{s.name, {}};
    scaled.values.reserve(s.values.size());
    for (double v : s.values) {
      scaled.values.push_back(hi == lo ? 0.0 : (v - lo) / (hi - lo) * 15.0);
    }
    out.push_back(std::move(scaled));
  }
  return out;
}

std::string profile_to_csv(const std::vector<NamedSeries>& series) {
  std::ostringstream out;
  out << "series,index,value\n";
  for (const NamedSeries& s : series) {
    for (size_t i = 0; i < s.values.size(); ++i) {
      out << s.name << ',' << i << ',' << csv_number(s.values[i]) << '\n';
    }
  }
  return out.str();
}

std::string profile_to_json(const std::vector<NamedSeries>& series) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const NamedSeries& s : series) {
    j.push_back({{"name", s.name}, {"values", s.values}});
  }
  return j.dump(2) + "\n";
}

DeltaReport delta_report(const EvaluationReport& a, const EvaluationReport& b) {
  if (a.inventory != b.inventory) {
    fail(ErrorKind::InvalidArgument, "delta_report needs a shared relation inventory");
  }
  DeltaReport report;
  report.label_a = a.setting + ' ' + a.model_id;
  report.label_b = b.setting + ' ' + b.model_id;
  report.inventory = a.inventory;
  report.deltas.reserve(a.inventory.size());
  for (size_t i = 0; i < a.inventory.size(); ++i) {
    report.deltas.push_back(a.per_relation[i].f1 - b.per_relation[i].f1);
  }
  report.weighted_delta = a.weighted_f1 - b.weighted_f1;
  return report;
}

std::string delta_to_csv(const DeltaReport& report) {
  std::ostringstream out;
  out << "relation,delta_f1\n";
  for (size_t i = 0; i < report.inventory.size(); ++i) {
    out << report.inventory[i] << ',' << csv_number(report.deltas[i]) << '\n';
  }
  out << "weighted_f1," << csv_number(report.weighted_delta) << '\n';
  return out.str();
}

std::string delta_to_json(const DeltaReport& report) {
  nlohmann::ordered_json deltas;
  for (size_t i = 0; i < report.inventory.size(); ++i) {
    deltas[report.inventory[i]] = report.deltas[i];
  }
  nlohmann::ordered_json j;
  j["a"] = report.label_a;
  j["b"] = report.label_b;
  j["deltas"] = std::move(deltas);
  j["weighted_f1"] = report.weighted_delta;
  return j.dump(2) + "\n";
}

bool RelationTable::has(const std::string& relation) const {
  return std::find(relations.begin(), relations.end(), relation) != relations.end();
}

size_t RelationTable::column_index(const std::string& column) const {
  auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) {
    fail(ErrorKind::InvalidArgument, "table has no column '" + column + "'");
  }
  return static_cast<size_t>(it - columns.begin());
}

double RelationTable::value(const std::string& relation, const std::string& column) const {
  auto it = std::find(relations.begin(), relations.end(), relation);
  if (it == relations.end()) {
    fail(ErrorKind::InvalidArgument, "table has no row '" + relation + "'");
  }
  return values[it - relations.begin()][column_index(column)];
}

RelationTable parse_relation_table(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 2) fail(ErrorKind::Format, "relation table needs a header and rows");

  RelationTable table;
  std::vector<std::string> header = split(lines[0], ',');
  if (header.size() < 2 || header[0] != "relation") {
    fail(ErrorKind::Format, "relation table header must start with 'relation'");
  }
  table.columns.assign(header.begin() + 1, header.end());

  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> cells = split(lines[i], ',');
    if (cells.size() != header.size()) {
      fail(ErrorKind::Format, "relation table row " + std::to_string(i + 1) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    }
    table.relations.push_back(cells[0]);
    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (size_t c = 1; c < cells.size(); ++c) row.push_back(parse_double(cells[c]));
    table.values.push_back(std::move(row));
  }
  return table;
}

RelationTable load_relation_table(const std::string& path) {
  return parse_relation_table(read_file(path));
}

namespace {

bool ow_class(const std::string& relation) {
  return relation == kOtherLabel || relation == kRandomLabel;
}

}  // namespace

CorrelationResult correlate_columns(const RelationTable& x_table, const std::string& x_column,
                                    const RelationTable& y_table, const std::string& y_column,
                                    bool include_ow_classes) {
  size_t xc = x_table.column_index(x_column);
  std::vector<double> xs, ys;
  for (size_t i = 0; i < x_table.relations.size(); ++i) {
    const std::string& relation = x_table.relations[i];
    if (relation == kAllRow) continue;
    if (!include_ow_classes && ow_class(relation)) continue;
    if (!y_table.has(relation)) continue;
    xs.push_back(x_table.values[i][xc]);
    ys.push_back(y_table.value(relation, y_column));
  }
  return {pearson(xs, ys), xs.size()};
}

std::vector<CorrelationEntry> correlation_report(const RelationTable& scores,
                                                 const RelationTable& stats,
                                                 bool include_ow_classes) {
  size_t ff = scores.column_index("ff_tuned");
  size_t best = scores.column_index("ffrnn_tuned");
  size_t untuned = scores.column_index("ffrnn_global");

  std::vector<double> f1, ml, gain, base, enc_gain, words;
  for (size_t i = 0; i < scores.relations.size(); ++i) {
    const std::string& relation = scores.relations[i];
    if (relation == kAllRow) continue;
    if (!include_ow_classes && ow_class(relation)) continue;
    gain.push_back(scores.values[i][best] - scores.values[i][untuned]);
    base.push_back(scores.values[i][untuned]);
    if (stats.has(relation)) {
      f1.push_back(scores.values[i][best]);
      ml.push_back(stats.value(relation, "multilabel_pct"));
      enc_gain.push_back(scores.values[i][best] - scores.values[i][ff]);
      words.push_back(stats.value(relation, "avg_words"));
    }
  }

  std::vector<CorrelationEntry> entries;
  entries.push_back({"f1_vs_multilabel_pct", f1.size(), pearson(f1, ml)});
  entries.push_back({"tuning_gain_vs_untuned_f1", gain.size(), pearson(gain, base)});
  entries.push_back({"encoder_gain_vs_avg_words", enc_gain.size(), pearson(enc_gain, words)});
  return entries;
}

std::string correlations_to_csv(const std::vector<CorrelationEntry>& entries) {
  std::ostringstream out;
  out << "name,pairs,coefficient\n";
  for (const CorrelationEntry& e : entries) {
    out << e.name << ',' << e.pairs << ',' << csv_number(e.coefficient) << '\n';
  }
  return out.str();
}

std::string correlations_to_json(const std::vector<CorrelationEntry>& entries) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const CorrelationEntry& e : entries) {
    j.push_back({{"name", e.name}, {"pairs", e.pairs}, {"coefficient", e.coefficient}});
  }
  return j.dump(2) + "\n";
}

}  // namespace cnrel
