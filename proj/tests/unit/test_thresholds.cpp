#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "cnrel/common.hpp"
#include "cnrel/eval.hpp"
#include "cnrel/thresholds.hpp"

using namespace cnrel;

namespace {

// Binary F1 of relation k over the dev fixture at one cutoff.
double binary_f1(const std::vector<std::vector<double>>& probs,
                 const std::vector<std::vector<std::string>>& gold,
                 const std::vector<std::string>& inventory, size_t k, double cutoff) {
  size_t tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < probs.size(); ++i) {
    bool predicted = probs[i][k] >= cutoff;
    bool actual = false;
    for (const std::string& label : gold[i]) actual = actual || label == inventory[k];
    if (predicted && actual) ++tp;
    if (predicted && !actual) ++fp;
    if (!predicted && actual) ++fn;
  }
  double p = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
  double r = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

struct Fixture {
  std::vector<std::vector<double>> probs;
  std::vector<std::vector<std::string>> gold;
  std::vector<std::string> inventory;
};

Fixture random_fixture(uint64_t seed, size_t labels, size_t instances) {
  Fixture f;
  Rng rng(seed);
  for (size_t k = 0; k < labels; ++k) f.inventory.push_back("R" + std::to_string(k));
  for (size_t i = 0; i < instances; ++i) {
    std::vector<double> p;
    std::vector<std::string> g;
    for (size_t k = 0; k < labels; ++k) {
      p.push_back(rng.real());
      if (rng.real() < 0.3) g.push_back(f.inventory[k]);
    }
    f.probs.push_back(std::move(p));
    f.gold.push_back(std::move(g));
  }
  return f;
}

std::vector<std::vector<std::string>> apply_cutoffs(const Fixture& f, const ThresholdSet& t) {
  std::vector<std::vector<std::string>> out;
  for (const auto& p : f.probs) {
    std::vector<std::string> labels;
    for (size_t k = 0; k < f.inventory.size(); ++k) {
      if (p[k] >= t.value_for(f.inventory[k])) labels.push_back(f.inventory[k]);
    }
    out.push_back(std::move(labels));
  }
  return out;
}

}  // namespace

TEST_CASE("default grid runs 0.01 to 0.99") {
  auto grid = default_grid();
  REQUIRE(grid.size() == 99);
  CHECK(std::abs(grid.front() - 0.01) < 1e-12);
  CHECK(std::abs(grid.back() - 0.99) < 1e-12);
  CHECK(std::abs(grid[49] - 0.5) < 1e-12);
}

TEST_CASE("mode names round-trip") {
  CHECK(threshold_mode_name(ThresholdMode::Global) == "global");
  CHECK(threshold_mode_name(ThresholdMode::PerRelation) == "per_relation");
  CHECK(parse_threshold_mode("global") == ThresholdMode::Global);
  CHECK(parse_threshold_mode("per_relation") == ThresholdMode::PerRelation);
  CHECK_THROWS_AS(parse_threshold_mode("perclass"), Error);
}

TEST_CASE("uniform set and value_for") {
  ThresholdSet set = ThresholdSet::uniform({"A", "B"}, 0.5);
  CHECK(set.value_for("A") == 0.5);
  CHECK(set.value_for("B") == 0.5);
  CHECK_THROWS_AS(set.value_for("C"), Error);
}

TEST_CASE("per-relation tuning finds the known optimum") {
  // Positives sit at 0.8/0.9, negatives at 0.3: every cutoff in (0.3, 0.8]
  // yields F1 = 1, so the smallest qualifying grid value 0.31 wins.
  Fixture f;
  f.inventory = {"A"};
  f.probs = {{0.8}, {0.9}, {0.3}, {0.3}};
  f.gold = {{"A"}, {"A"}, {}, {}};
  ThresholdSet tuned = tune_thresholds(f.probs, f.gold, f.inventory, ThresholdMode::PerRelation);
  CHECK(std::abs(tuned.value_for("A") - 0.31) < 1e-12);
}

TEST_CASE("ties keep the smallest grid value") {
  // All probabilities far above the grid: every cutoff gives the same F1.
  Fixture f;
  f.inventory = {"A"};
  f.probs = {{0.995}, {0.999}};
  f.gold = {{"A"}, {"A"}};
  ThresholdSet tuned = tune_thresholds(f.probs, f.gold, f.inventory, ThresholdMode::PerRelation);
  CHECK(std::abs(tuned.value_for("A") - 0.01) < 1e-12);
}

TEST_CASE("relations without dev positives keep the default cutoff") {
  Fixture f;
  f.inventory = {"A", "B"};
  f.probs = {{0.9, 0.4}, {0.2, 0.6}};
  f.gold = {{"A"}, {"A"}};
  ThresholdSet tuned = tune_thresholds(f.probs, f.gold, f.inventory, ThresholdMode::PerRelation);
  CHECK(tuned.value_for("B") == 0.5);
}

TEST_CASE("per-relation dominates global dominates default") {
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    Fixture f = random_fixture(seed, 3 + seed % 5, 40 + seed % 30);
    ThresholdSet per =
        tune_thresholds(f.probs, f.gold, f.inventory, ThresholdMode::PerRelation);
    ThresholdSet global = tune_thresholds(f.probs, f.gold, f.inventory, ThresholdMode::Global);
    ThresholdSet fallback = ThresholdSet::uniform(f.inventory);

    for (size_t k = 0; k < f.inventory.size(); ++k) {
      double tuned_f1 = binary_f1(f.probs, f.gold, f.inventory, k, per.values[k]);
      double default_f1 = binary_f1(f.probs, f.gold, f.inventory, k, 0.5);
      CHECK(tuned_f1 >= default_f1);
    }

    double w_per = evaluate(apply_cutoffs(f, per), f.gold, f.inventory).weighted_f1;
    double w_global = evaluate(apply_cutoffs(f, global), f.gold, f.inventory).weighted_f1;
    double w_default = evaluate(apply_cutoffs(f, fallback), f.gold, f.inventory).weighted_f1;
    CHECK(w_per >= w_global);
    CHECK(w_global >= w_default);
  }
}

TEST_CASE("global mode shares one cutoff") {
  Fixture f = random_fixture(77, 4, 50);
  ThresholdSet global = tune_thresholds(f.probs, f.gold, f.inventory, ThresholdMode::Global);
  for (double v : global.values) CHECK(v == global.values[0]);
}

TEST_CASE("threshold json round-trips with inventory order") {
  ThresholdSet set;
  set.mode = ThresholdMode::PerRelation;
  set.inventory = {"B", "A", "C"};
  set.values = {0.31, 0.5, 0.07};
  std::string text = thresholds_to_json(set);
  ThresholdSet back = thresholds_from_json(text);
  CHECK(back.mode == set.mode);
  CHECK(back.inventory == set.inventory);
  CHECK(back.values == set.values);

  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "cnrel_thresholds_test.json";
  save_thresholds(path.string(), set);
  ThresholdSet loaded = load_thresholds(path.string());
  CHECK(loaded.inventory == set.inventory);
  CHECK(loaded.values == set.values);
  fs::remove(path);
}

TEST_CASE("tuning validates input shapes") {
  CHECK_THROWS_AS(tune_thresholds({{0.5}}, {{"A"}, {"A"}}, {"A"}, ThresholdMode::Global), Error);
  CHECK_THROWS_AS(tune_thresholds({{0.5, 0.5}}, {{"A"}}, {"A"}, ThresholdMode::Global), Error);
}
