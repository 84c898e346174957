#include "cnrel/eval.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace cnrel {

namespace {

std::string fixed2(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string column_label(const EvaluationReport& r) {
  std::string label = r.setting.empty() ? "score" : r.setting;
  if (!r.model_id.empty()) label += " " + r.model_id;
  return label;
}

}  // namespace

const RelationScore& EvaluationReport::score(const std::string& relation) const {
  for (size_t i = 0; i < inventory.size(); ++i) {
    if (inventory[i] == relation) return per_relation[i];
  }
  fail(ErrorKind::InvalidArgument, "relation '" + relation + "' not in report");
}

EvaluationReport evaluate(const std::vector<std::vector<std::string>>& predicted,
                          const std::vector<std::vector<std::string>>& gold,
                          const std::vector<std::string>& inventory) {
  if (predicted.size() != gold.size()) {
    fail(ErrorKind::InvalidArgument,
         "prediction/gold length mismatch: " + std::to_string(predicted.size()) + " vs " +
             std::to_string(gold.size()));
  }
  if (inventory.empty()) fail(ErrorKind::InvalidArgument, "empty relation inventory");

  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < inventory.size(); ++i) index[inventory[i]] = i;

  std::vector<size_t> tp(inventory.size(), 0), fp(inventory.size(), 0), fn(inventory.size(), 0);
  std::vector<char> has_pred(inventory.size(), 0), has_gold(inventory.size(), 0);
  for (size_t i = 0; i < predicted.size(); ++i) {
    std::fill(has_pred.begin(), has_pred.end(), 0);
    std::fill(has_gold.begin(), has_gold.end(), 0);
    for (const std::string& label : predicted[i]) {
      auto it = index.find(label);
      if (it == index.end()) fail(ErrorKind::InvalidArgument, "predicted label '" + label + "' not in inventory");
      has_pred[it->second] = 1;
    }
    for (const std::string& label : gold[i]) {
      auto it = index.find(label);
      if (it == index.end()) fail(ErrorKind::InvalidArgument, "gold label '" + label + "' not in inventory");
      has_gold[it->second] = 1;
    }
    for (size_t k = 0; k < inventory.size(); ++k) {
      if (has_pred[k] && has_gold[k]) ++tp[k];
      else if (has_pred[k]) ++fp[k];
      else if (has_gold[k]) ++fn[k];
    }
  }

  EvaluationReport report;
  report.inventory = inventory;
  report.per_relation.resize(inventory.size());
  double weighted_sum = 0.0;
  double support_sum = 0.0;
  for (size_t k = 0; k < inventory.size(); ++k) {
    RelationScore& s = report.per_relation[k];
    size_t pred_pos = tp[k] + fp[k];
    size_t gold_pos = tp[k] + fn[k];
    s.precision = pred_pos ? static_cast<double>(tp[k]) / pred_pos : 0.0;
    s.recall = gold_pos ? static_cast<double>(tp[k]) / gold_pos : 0.0;
    s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall)
                                        : 0.0;
    s.support = static_cast<double>(gold_pos);
    weighted_sum += s.support * s.f1;
    support_sum += s.support;
  }
  report.weighted_f1 = support_sum > 0 ? weighted_sum / support_sum : 0.0;
  return report;
}

EvaluationReport aggregate_runs(const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) fail(ErrorKind::InvalidArgument, "no reports to aggregate");
  const EvaluationReport& first = reports.front();
  for (const EvaluationReport& r : reports) {
    if (r.inventory != first.inventory) {
      fail(ErrorKind::InvalidArgument, "reports disagree on the relation inventory");
    }
    if (r.setting != first.setting) {
      fail(ErrorKind::InvalidArgument, "reports mix settings: '" + first.setting + "' vs '" +
                                           r.setting + "'");
    }
  }

  EvaluationReport out;
  out.inventory = first.inventory;
  out.setting = first.setting;
  out.model_id = first.model_id;
  out.runs = reports.size();
  out.per_relation.resize(out.inventory.size());
  double n = static_cast<double>(reports.size());
  for (const EvaluationReport& r : reports) {
    out.weighted_f1 += r.weighted_f1 / n;
    for (size_t k = 0; k < out.per_relation.size(); ++k) {
      out.per_relation[k].precision += r.per_relation[k].precision / n;
      out.per_relation[k].recall += r.per_relation[k].recall / n;
      out.per_relation[k].f1 += r.per_relation[k].f1 / n;
      out.per_relation[k].support += r.per_relation[k].support / n;
    }
  }
  return out;
}

std::string report_to_json(const EvaluationReport& report) {
  nlohmann::ordered_json j;
  j["setting"] = report.setting;
  j["model_id"] = report.model_id;
  j["seed"] = report.seed;
  j["runs"] = report.runs;
  j["weighted_f1"] = report.weighted_f1;
  j["inventory"] = report.inventory;
  nlohmann::ordered_json rels = nlohmann::ordered_json::object();
  for (size_t k = 0; k < report.inventory.size(); ++k) {
    const RelationScore& s = report.per_relation[k];
    rels[report.inventory[k]] = {{"precision", s.precision},
                                 {"recall", s.recall},
                                 {"f1", s.f1},
                                 {"support", s.support}};
  }
  j["per_relation"] = std::move(rels);
  return j.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
  EvaluationReport report;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    report.setting = j.at("setting").get<std::string>();
    report.model_id = j.at("model_id").get<std::string>();
    report.seed = j.at("seed").get<uint64_t>();
    report.runs = j.at("runs").get<size_t>();
    report.weighted_f1 = j.at("weighted_f1").get<double>();
    report.inventory = j.at("inventory").get<std::vector<std::string>>();
    for (const std::string& relation : report.inventory) {
      const auto& s = j.at("per_relation").at(relation);
      RelationScore score;
      score.precision = s.at("precision").get<double>();
      score.recall = s.at("recall").get<double>();
      score.f1 = s.at("f1").get<double>();
      score.support = s.at("support").get<double>();
      report.per_relation.push_back(score);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed evaluation report: ") + e.what());
  }
  return report;
}

void save_report(const std::string& path, const EvaluationReport& report) {
  write_file(path, report_to_json(report));
}

EvaluationReport load_report(const std::string& path) {
  return report_from_json(read_file(path));
}

std::string render_table_text(const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) fail(ErrorKind::InvalidArgument, "no reports to render");
  const std::vector<std::string>& inventory = reports.front().inventory;
  for (const EvaluationReport& r : reports) {
    if (r.inventory != inventory) {
      fail(ErrorKind::InvalidArgument, "reports disagree on the relation inventory");
    }
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"relation"};
  for (const EvaluationReport& r : reports) header.push_back(column_label(r));
  rows.push_back(header);
  for (size_t k = 0; k < inventory.size(); ++k) {
    std::vector<std::string> row{inventory[k]};
    for (const EvaluationReport& r : reports) row.push_back(fixed2(r.per_relation[k].f1));
    rows.push_back(row);
  }
  std::vector<std::string> last{"weighted F1"};
  for (const EvaluationReport& r : reports) last.push_back(fixed2(r.weighted_f1));
  rows.push_back(last);

  std::vector<size_t> widths(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out << "  ";
      out << rows[r][c];
      if (c + 1 < rows[r].size()) out << std::string(widths[c] - rows[r][c].size(), ' ');
    }
    out << '\n';
    if (r == 0 || r + 2 == rows.size()) {
      size_t total = 0;
      for (size_t w : widths) total += w;
      out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

std::string render_table_csv(const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) fail(ErrorKind::InvalidArgument, "no reports to render");
  const std::vector<std::string>& inventory = reports.front().inventory;
  for (const EvaluationReport& r : reports) {
    if (r.inventory != inventory) {
      fail(ErrorKind::InvalidArgument, "reports disagree on the relation inventory");
    }
  }
  std::ostringstream out;
  out << "relation";
  for (const EvaluationReport& r : reports) out << ',' << column_label(r);
  out << '\n';
  for (size_t k = 0; k < inventory.size(); ++k) {
    out << inventory[k];
    for (const EvaluationReport& r : reports) out << ',' << format_double(r.per_relation[k].f1);
    out << '\n';
  }
  out << "weighted_f1";
  for (const EvaluationReport& r : reports) out << ',' << format_double(r.weighted_f1);
  out << '\n';
  return out.str();
}

}  // namespace cnrel
