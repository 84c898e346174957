#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "cnrel/common.hpp"
#include "cnrel/eval.hpp"

using namespace cnrel;

namespace {

using Labels = std::vector<std::vector<std::string>>;

// Independent recomputation with set semantics, one label at a time.
EvaluationReport oracle(const Labels& predicted, const Labels& gold,
                        const std::vector<std::string>& inventory) {
  EvaluationReport report;
  report.inventory = inventory;
  double weighted = 0.0;
  double total_support = 0.0;
  for (const std::string& relation : inventory) {
    double tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < predicted.size(); ++i) {
      std::set<std::string> p(predicted[i].begin(), predicted[i].end());
      std::set<std::string> g(gold[i].begin(), gold[i].end());
      bool pred = p.count(relation) > 0;
      bool actual = g.count(relation) > 0;
      if (pred && actual) ++tp;
      if (pred && !actual) ++fp;
      if (!pred && actual) ++fn;
    }
    RelationScore s;
    s.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    s.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall)
                                      : 0.0;
    s.support = tp + fn;
    report.per_relation.push_back(s);
    weighted += s.support * s.f1;
    total_support += s.support;
  }
  report.weighted_f1 = total_support > 0 ? weighted / total_support : 0.0;
  return report;
}

}  // namespace

TEST_CASE("evaluate matches hand-worked counts") {
  std::vector<std::string> inventory{"A", "B"};
  Labels predicted{{"A"}, {"B"}, {"A"}, {}};
  Labels gold{{"A"}, {"A", "B"}, {}, {"B"}};
  EvaluationReport r = evaluate(predicted, gold, inventory);

  // A: tp 1, fp 1, fn 1. B: tp 1, fp 0, fn 1.
  CHECK(r.score("A").precision == 0.5);
  CHECK(r.score("A").recall == 0.5);
  CHECK(r.score("A").f1 == 0.5);
  CHECK(r.score("A").support == 2.0);
  CHECK(r.score("B").precision == 1.0);
  CHECK(r.score("B").recall == 0.5);
  CHECK(r.score("B").f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.score("B").support == 2.0);
  CHECK(r.weighted_f1 == doctest::Approx(7.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("zero denominators score zero") {
  std::vector<std::string> inventory{"Never", "PredOnly", "GoldOnly"};
  Labels predicted{{"PredOnly"}, {}};
  Labels gold{{}, {"GoldOnly"}};
  EvaluationReport r = evaluate(predicted, gold, inventory);
  CHECK(r.score("Never").precision == 0.0);
  CHECK(r.score("Never").recall == 0.0);
  CHECK(r.score("Never").f1 == 0.0);
  CHECK(r.score("Never").support == 0.0);
  CHECK(r.score("PredOnly").precision == 0.0);
  CHECK(r.score("PredOnly").f1 == 0.0);
  CHECK(r.score("GoldOnly").recall == 0.0);
  CHECK(r.score("GoldOnly").support == 1.0);
}

TEST_CASE("duplicate labels in one instance count once") {
  std::vector<std::string> inventory{"A"};
  EvaluationReport r = evaluate({{"A", "A"}}, {{"A", "A", "A"}}, inventory);
  CHECK(r.score("A").support == 1.0);
  CHECK(r.score("A").f1 == 1.0);
}

TEST_CASE("evaluate rejects malformed input") {
  CHECK_THROWS_AS(evaluate({{"A"}}, {{"A"}, {"A"}}, {"A"}), Error);
  CHECK_THROWS_AS(evaluate({{"A"}}, {{"A"}}, {}), Error);
  CHECK_THROWS_AS(evaluate({{"X"}}, {{"A"}}, {"A"}), Error);
  CHECK_THROWS_AS(evaluate({{"A"}}, {{"X"}}, {"A"}), Error);
  CHECK_THROWS_AS(evaluate({}, {}, {"A"}).score("B"), Error);
}

TEST_CASE("no instances means all zeros") {
  EvaluationReport r = evaluate({}, {}, {"A", "B"});
  CHECK(r.weighted_f1 == 0.0);
  CHECK(r.score("A").f1 == 0.0);
}

TEST_CASE("evaluate agrees with a brute-force oracle") {
  for (uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    size_t label_count = 2 + rng.index(6);
    std::vector<std::string> inventory;
    for (size_t k = 0; k < label_count; ++k) inventory.push_back("R" + std::to_string(k));
    size_t instances = 20 + rng.index(60);
    Labels predicted(instances), gold(instances);
    for (size_t i = 0; i < instances; ++i) {
      for (size_t k = 0; k < label_count; ++k) {
        if (rng.real() < 0.35) predicted[i].push_back(inventory[k]);
        if (rng.real() < 0.3) gold[i].push_back(inventory[k]);
        if (rng.real() < 0.05) {
          predicted[i].push_back(inventory[k]);  // deliberate duplicate
        }
      }
    }
    EvaluationReport got = evaluate(predicted, gold, inventory);
    EvaluationReport want = oracle(predicted, gold, inventory);
    for (size_t k = 0; k < label_count; ++k) {
      CHECK(got.per_relation[k].precision == want.per_relation[k].precision);
      CHECK(got.per_relation[k].recall == want.per_relation[k].recall);
      CHECK(got.per_relation[k].f1 == want.per_relation[k].f1);
      CHECK(got.per_relation[k].support == want.per_relation[k].support);
    }
    CHECK(got.weighted_f1 == doctest::Approx(want.weighted_f1).epsilon(1e-12));

    // Weighted F1 is exactly the support-weighted mean of per-relation F1.
    double weighted = 0.0, support = 0.0;
    for (const RelationScore& s : got.per_relation) {
      weighted += s.support * s.f1;
      support += s.support;
    }
    if (support > 0) CHECK(got.weighted_f1 == doctest::Approx(weighted / support).epsilon(1e-12));
  }
}

TEST_CASE("aggregate_runs averages every metric") {
  std::vector<std::string> inventory{"A"};
  EvaluationReport a = evaluate({{"A"}, {}}, {{"A"}, {"A"}}, inventory);  // f1 2/3, support 2
  EvaluationReport b = evaluate({{"A"}, {"A"}, {"A"}}, {{"A"}, {"A"}, {"A"}}, inventory);
  a.setting = b.setting = "cw";
  a.model_id = b.model_id = "ff";
  EvaluationReport mean = aggregate_runs({a, b});
  CHECK(mean.runs == 2);
  CHECK(mean.setting == "cw");
  CHECK(mean.model_id == "ff");
  CHECK(mean.score("A").f1 == doctest::Approx((2.0 / 3.0 + 1.0) / 2.0).epsilon(1e-12));
  CHECK(mean.score("A").support == 2.5);  // (2 + 3) / 2
  CHECK(mean.weighted_f1 == doctest::Approx((a.weighted_f1 + b.weighted_f1) / 2).epsilon(1e-12));

  EvaluationReport other = b;
  other.inventory = {"B"};
  CHECK_THROWS_AS(aggregate_runs({a, other}), Error);
  EvaluationReport ow = b;
  ow.setting = "ow1";
  CHECK_THROWS_AS(aggregate_runs({a, ow}), Error);
  CHECK_THROWS_AS(aggregate_runs({}), Error);
}

TEST_CASE("report json round-trips") {
  EvaluationReport r = evaluate({{"A"}, {"B"}}, {{"A"}, {"A", "B"}}, {"A", "B"});
  r.setting = "ow2";
  r.model_id = "ffrnn";
  r.seed = 17;
  r.runs = 3;
  std::string text = report_to_json(r);
  EvaluationReport back = report_from_json(text);
  CHECK(back.inventory == r.inventory);
  CHECK(back.setting == "ow2");
  CHECK(back.model_id == "ffrnn");
  CHECK(back.seed == 17);
  CHECK(back.runs == 3);
  CHECK(back.weighted_f1 == r.weighted_f1);
  for (size_t k = 0; k < r.inventory.size(); ++k) {
    CHECK(back.per_relation[k].precision == r.per_relation[k].precision);
    CHECK(back.per_relation[k].recall == r.per_relation[k].recall);
    CHECK(back.per_relation[k].f1 == r.per_relation[k].f1);
    CHECK(back.per_relation[k].support == r.per_relation[k].support);
  }
  CHECK_THROWS_AS(report_from_json("{\"setting\": 1}"), Error);

  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() / "cnrel_eval_report_test.json";
  save_report(path.string(), r);
  EvaluationReport loaded = load_report(path.string());
  CHECK(loaded.weighted_f1 == r.weighted_f1);
  fs::remove(path);
}

TEST_CASE("tables print two decimals per column") {
  EvaluationReport r = evaluate({{"A"}, {"B"}}, {{"A"}, {"A", "B"}}, {"A", "B"});
  r.setting = "cw";
  r.model_id = "ff";
  std::string text = render_table_text({r, r});
  CHECK(text.find("relation") != std::string::npos);
  CHECK(text.find("cw ff") != std::string::npos);
  CHECK(text.find("0.67") != std::string::npos);  // B's f1 = 2/3
  CHECK(text.find("weighted F1") != std::string::npos);
  CHECK(text.find("----") != std::string::npos);

  std::string csv = render_table_csv({r});
  auto lines = split(csv, '\n');
  CHECK(lines[0] == "relation,cw ff");
  CHECK(lines[1].rfind("A,", 0) == 0);
  CHECK(lines[3].rfind("weighted_f1,", 0) == 0);
  CHECK_THROWS_AS(render_table_text({}), Error);
  EvaluationReport mismatched = r;
  mismatched.inventory = {"B", "A"};
  CHECK_THROWS_AS(render_table_csv({r, mismatched}), Error);
}
