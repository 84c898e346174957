#include "cnrel/thresholds.hpp"

#include <algorithm>
#include <unordered_map>

#include <json.hpp>

namespace cnrel {

namespace {

// Multi-hot gold matrix aligned with the inventory.
std::vector<std::vector<char>> gold_matrix(const std::vector<std::vector<std::string>>& gold,
                                           const std::vector<std::string>& inventory) {
  std::unordered_map<std::string, size_t> index;
  for (size_t i = 0; i < inventory.size(); ++i) index[inventory[i]] = i;
  std::vector<std::vector<char>> out(gold.size(), std::vector<char>(inventory.size(), 0));
  for (size_t i = 0; i < gold.size(); ++i) {
    for (const std::string& label : gold[i]) {
      auto it = index.find(label);
      if (it == index.end()) {
        fail(ErrorKind::InvalidArgument, "gold label '" + label + "' not in inventory");
      }
      out[i][it->second] = 1;
    }
  }
  return out;
}

double binary_f1(const std::vector<std::vector<double>>& probs,
                 const std::vector<std::vector<char>>& gold, size_t k, double threshold) {
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    bool pred = probs[i][k] >= threshold;
    if (pred && gold[i][k]) ++tp;
    else if (pred) ++fp;
    else if (gold[i][k]) ++fn;
  }
  if (tp == 0) return 0.0;
  double precision = static_cast<double>(tp) / (tp + fp);
  double recall = static_cast<double>(tp) / (tp + fn);
  return 2 * precision * recall / (precision + recall);
}

double weighted_f1(const std::vector<std::vector<double>>& probs,
                   const std::vector<std::vector<char>>& gold, size_t label_count,
                   double threshold) {
  double weighted = 0.0;
  double support_sum = 0.0;
  for (size_t k = 0; k < label_count; ++k) {
    size_t support = 0;
    for (const auto& row : gold) support += row[k];
    weighted += support * binary_f1(probs, gold, k, threshold);
    support_sum += support;
  }
  return support_sum > 0 ? weighted / support_sum : 0.0;
}

}  // namespace

std::string threshold_mode_name(ThresholdMode mode) {
  return mode == ThresholdMode::Global ? "global" : "per_relation";
}

ThresholdMode parse_threshold_mode(std::string_view name) {
  if (name == "global") return ThresholdMode::Global;
  if (name == "per_relation") return ThresholdMode::PerRelation;
  fail(ErrorKind::InvalidArgument, "unknown threshold mode: '" + std::string(name) + "'");
}

double ThresholdSet::value_for(const std::string& relation) const {
  for (size_t i = 0; i < inventory.size(); ++i) {
    if (inventory[i] == relation) return values[i];
  }
  fail(ErrorKind::InvalidArgument, "no threshold for relation '" + relation + "'");
}

ThresholdSet ThresholdSet::uniform(const std::vector<std::string>& inventory, double value) {
  ThresholdSet set;
  set.mode = ThresholdMode::Global;
  set.inventory = inventory;
  set.values.assign(inventory.size(), value);
  return set;
}

std::vector<double> default_grid() {
  std::vector<double> grid;
  grid.reserve(99);
  for (int i = 1; i <= 99; ++i) grid.push_back(i / 100.0);
  return grid;
}

ThresholdSet tune_thresholds(const std::vector<std::vector<double>>& dev_probs,
                             const std::vector<std::vector<std::string>>& dev_gold,
                             const std::vector<std::string>& inventory, ThresholdMode mode,
                             const std::vector<double>& grid) {
  if (dev_probs.empty()) fail(ErrorKind::InvalidArgument, "cannot tune thresholds on an empty dev set");
  if (dev_probs.size() != dev_gold.size()) {
    fail(ErrorKind::InvalidArgument, "probability/gold length mismatch");
  }
  for (const auto& row : dev_probs) {
    if (row.size() != inventory.size()) {
      fail(ErrorKind::InvalidArgument, "probability row width does not match inventory");
    }
  }
  if (grid.empty()) fail(ErrorKind::InvalidArgument, "empty threshold grid");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] <= 0.0 || grid[i] >= 1.0 || (i > 0 && grid[i] <= grid[i - 1])) {
      fail(ErrorKind::InvalidArgument, "grid must be strictly ascending within (0, 1)");
    }
  }

  std::vector<std::vector<char>> gold = gold_matrix(dev_gold, inventory);

  ThresholdSet set;
  set.mode = mode;
  set.inventory = inventory;
  set.values.assign(inventory.size(), 0.5);

  if (mode == ThresholdMode::Global) {
    double best_value = grid.front();
    double best_score = -1.0;
    for (double t : grid) {
      double score = weighted_f1(dev_probs, gold, inventory.size(), t);
      if (score > best_score) {
        best_score = score;
        best_value = t;
      }
    }
    std::fill(set.values.begin(), set.values.end(), best_value);
    return set;
  }

  for (size_t k = 0; k < inventory.size(); ++k) {
    size_t positives = 0;
    for (const auto& row : gold) positives += row[k];
    if (positives == 0) continue;  // keep the 0.5 default
    double best_value = grid.front();
    double best_score = -1.0;
    for (double t : grid) {
      double score = binary_f1(dev_probs, gold, k, t);
      if (score > best_score) {
        best_score = score;
        best_value = t;
      }
    }
    set.values[k] = best_value;
  }
  return set;
}

std::string thresholds_to_json(const ThresholdSet& set) {
  nlohmann::ordered_json j;
  j["mode"] = threshold_mode_name(set.mode);
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  for (size_t i = 0; i < set.inventory.size(); ++i) values[set.inventory[i]] = set.values[i];
  j["values"] = std::move(values);
  return j.dump(2) + "\n";
}

ThresholdSet thresholds_from_json(const std::string& text) {
  ThresholdSet set;
  try {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
    set.mode = parse_threshold_mode(j.at("mode").get<std::string>());
    for (const auto& [relation, value] : j.at("values").items()) {
      set.inventory.push_back(relation);
      set.values.push_back(value.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed threshold file: ") + e.what());
  }
  for (double v : set.values) {
    if (!(v > 0.0 && v < 1.0)) fail(ErrorKind::Format, "threshold outside (0, 1)");
  }
  return set;
}

void save_thresholds(const std::string& path, const ThresholdSet& set) {
  write_file(path, thresholds_to_json(set));
}

ThresholdSet load_thresholds(const std::string& path) {
  return thresholds_from_json(read_file(path));
}

}  // namespace cnrel
