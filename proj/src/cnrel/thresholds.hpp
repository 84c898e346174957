#pragma once

#include <string>
#include <vector>

#include "cnrel/types.hpp"

namespace cnrel {

enum class ThresholdMode { Global, PerRelation };

std::string threshold_mode_name(ThresholdMode mode);
ThresholdMode parse_threshold_mode(std::string_view name);

struct ThresholdSet {
  ThresholdMode mode = ThresholdMode::Global;
  std::vector<std::string> inventory;
  std::vector<double> values;  // aligned with inventory

  double value_for(const std::string& relation) const;

  static ThresholdSet uniform(const std::vector<std::string>& inventory, double value = 0.5);
};

// 0.01, 0.02, ..., 0.99.
std::vector<double> default_grid();

// Grid search on dev probabilities. Per-relation mode maximizes each
// relation's binary F1 independently; global mode maximizes weighted F1
// with one shared value. Ties take the smallest qualifying grid value;
// relations without dev positives keep 0.5.
ThresholdSet tune_thresholds(const std::vector<std::vector<double>>& dev_probs,
                             const std::vector<std::vector<std::string>>& dev_gold,
                             const std::vector<std::string>& inventory, ThresholdMode mode,
                             const std::vector<double>& grid = default_grid());

std::string thresholds_to_json(const ThresholdSet& set);
ThresholdSet thresholds_from_json(const std::string& text);
void save_thresholds(const std::string& path, const ThresholdSet& set);
ThresholdSet load_thresholds(const std::string& path);

}  // namespace cnrel
