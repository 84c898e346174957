#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "cnrel/annotate.hpp"
#include "cnrel/common.hpp"

using namespace cnrel;

namespace {

Instance inst(const std::string& head, const std::string& tail,
              std::vector<std::string> labels) {
  Instance out;
  out.head = normalize_concept(head);
  out.tail = normalize_concept(tail);
  out.labels = std::move(labels);
  return out;
}

std::vector<Instance> varied_pool(size_t n, uint64_t seed) {
  std::vector<std::string> relations{"IsA", "HasA", "UsedFor", "Causes"};
  Rng rng(seed);
  std::vector<Instance> pool;
  for (size_t i = 0; i < n; ++i) {
    std::vector<std::string> labels;
    for (const std::string& r : relations) {
      if (rng.real() < 0.4) labels.push_back(r);
    }
    if (labels.empty()) labels.push_back(relations[rng.index(relations.size())]);
    pool.push_back(inst("head " + std::to_string(i), "tail " + std::to_string(i), labels));
  }
  return pool;
}

}  // namespace

TEST_CASE("response names round-trip") {
  CHECK(response_name(Response::Applies) == "applies");
  CHECK(response_name(Response::NotApplies) == "not_applies");
  CHECK(response_name(Response::NotSure) == "not_sure");
  CHECK(parse_response("applies") == Response::Applies);
  CHECK(parse_response("not_applies") == Response::NotApplies);
  CHECK(parse_response("not_sure") == Response::NotSure);
  CHECK_THROWS_AS(parse_response("maybe"), Error);
}

TEST_CASE("sampled candidates never repeat a gold label") {
  std::vector<std::string> relations{"IsA", "HasA", "UsedFor", "Causes"};
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<Instance> pool = varied_pool(40, seed + 100);
    auto items = sample_candidates(pool, relations, 30, seed);
    REQUIRE(items.size() == 30);
    for (size_t k = 0; k < items.size(); ++k) {
      CHECK(items[k].id == k + 1);
      CHECK(std::find(items[k].gold_labels.begin(), items[k].gold_labels.end(),
                      items[k].candidate_relation) == items[k].gold_labels.end());
      CHECK(std::find(relations.begin(), relations.end(), items[k].candidate_relation) !=
            relations.end());
    }
  }
}

TEST_CASE("sampling is seed-deterministic") {
  std::vector<std::string> relations{"IsA", "HasA", "UsedFor", "Causes"};
  std::vector<Instance> pool = varied_pool(40, 9);
  auto a = sample_candidates(pool, relations, 20, 3);
  auto b = sample_candidates(pool, relations, 20, 3);
  REQUIRE(a.size() == b.size());
  for (size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].head.surface == b[k].head.surface);
    CHECK(a[k].candidate_relation == b[k].candidate_relation);
  }
  auto c = sample_candidates(pool, relations, 20, 4);
  bool same = true;
  for (size_t k = 0; k < a.size(); ++k) {
    same = same && a[k].head.surface == c[k].head.surface &&
           a[k].candidate_relation == c[k].candidate_relation;
  }
  CHECK(!same);
}

TEST_CASE("saturated instances are ineligible") {
  std::vector<std::string> relations{"IsA", "HasA"};
  std::vector<Instance> pool{
      inst("free one", "x", {"IsA"}),
      inst("saturated", "y", {"IsA", "HasA"}),
      inst("free two", "z", {"HasA"}),
  };
  auto items = sample_candidates(pool, relations, 2, 1);
  for (const AnnotationItem& item : items) CHECK(item.head.surface != "saturated");

  try {
    sample_candidates(pool, relations, 3, 1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Generation);
    CHECK(std::string(e.what()).find("only 2") != std::string::npos);
  }

  CHECK_THROWS_AS(sample_candidates(pool, {"IsA"}, 1, 1), Error);
  CHECK_THROWS_AS(sample_candidates(pool, relations, 0, 1), Error);
}

TEST_CASE("the annotator sheet hides gold labels") {
  AnnotationItem item;
  item.id = 1;
  item.head = normalize_concept("hot dog");
  item.tail = normalize_concept("picnic");
  item.candidate_relation = "AtLocation";
  item.gold_labels = {"SecretGold"};
  std::string csv = sheet_csv({item});
  auto lines = split(csv, '\n');
  CHECK(lines[0] == "id,head,tail,candidate_relation,response");
  CHECK(lines[1] == "1,hot dog,picnic,AtLocation,");
  CHECK(csv.find("SecretGold") == std::string::npos);
}

TEST_CASE("annotation items round-trip through json") {
  std::vector<Instance> pool = varied_pool(12, 2);
  auto items = sample_candidates(pool, {"IsA", "HasA", "UsedFor"}, 8, 5);
  auto back = items_from_json(items_to_json(items));
  REQUIRE(back.size() == items.size());
  for (size_t k = 0; k < items.size(); ++k) {
    CHECK(back[k].id == items[k].id);
    CHECK(back[k].head.surface == items[k].head.surface);
    CHECK(back[k].tail.surface == items[k].tail.surface);
    CHECK(back[k].candidate_relation == items[k].candidate_relation);
    CHECK(back[k].gold_labels == items[k].gold_labels);
  }
  CHECK_THROWS_AS(items_from_json("[{\"id\": 1}]"), Error);
  CHECK_THROWS_AS(items_from_json("not json"), Error);
}

TEST_CASE("filled sheets parse around embedded commas") {
  std::string sheet =
      "id,head,tail,candidate_relation,response\n"
      "1,big, red fish,water,IsA,applies\n"
      "2,hot dog,bun,HasA,not_applies\r\n"
      "3,a,b,UsedFor,not_sure  \n"
      "\n";
  auto responses = parse_responses(sheet);
  REQUIRE(responses.size() == 3);
  CHECK(responses.at(1) == Response::Applies);
  CHECK(responses.at(2) == Response::NotApplies);
  CHECK(responses.at(3) == Response::NotSure);

  CHECK_THROWS_AS(parse_responses("id,response\n1,a,b,IsA,\n"), Error);        // blank response
  CHECK_THROWS_AS(parse_responses("id,response\n1,a,b,IsA,maybe\n"), Error);   // unknown word
  CHECK_THROWS_AS(parse_responses("id,response\nx,a,b,IsA,applies\n"), Error); // bad id
  CHECK_THROWS_AS(parse_responses("id,response\n3,applies\n"), Error);         // one comma only
  std::string twice =
      "id,head,tail,candidate_relation,response\n1,a,b,IsA,applies\n1,a,b,IsA,applies\n";
  CHECK_THROWS_AS(parse_responses(twice), Error);
}

TEST_CASE("agreement counts matches and both-not-sure pairs") {
  std::vector<AnnotationItem> items;
  for (size_t id = 1; id <= 4; ++id) {
    AnnotationItem item;
    item.id = id;
    item.head = normalize_concept("h" + std::to_string(id));
    item.tail = normalize_concept("t" + std::to_string(id));
    item.candidate_relation = "IsA";
    items.push_back(item);
  }
  std::map<size_t, Response> first{{1, Response::Applies},
                                   {2, Response::NotSure},
                                   {3, Response::NotApplies},
                                   {4, Response::Applies}};
  std::map<size_t, Response> second{{1, Response::Applies},
                                    {2, Response::NotSure},
                                    {3, Response::NotApplies},
                                    {4, Response::NotSure}};
  std::map<size_t, Response> adjudicator{{4, Response::NotApplies}};

  MergeResult merged = agreement_and_adjudicate(items, first, second, adjudicator);
  CHECK(merged.total == 4);
  CHECK(merged.agreeing == 3);  // item 2's double not-sure agrees
  CHECK(merged.agreement_rate == 0.75);
  CHECK(merged.applies == 1);
  CHECK(merged.not_applies == 2);
  CHECK(merged.not_sure == 1);
  CHECK(merged.finals.at(4) == Response::NotApplies);

  CHECK_THROWS_AS(agreement_and_adjudicate(items, first, second, {}), Error);
  try {
    agreement_and_adjudicate(items, first, second, {});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("item 4") != std::string::npos);
  }
  CHECK_THROWS_AS(agreement_and_adjudicate(items, {}, second, adjudicator), Error);
  CHECK_THROWS_AS(agreement_and_adjudicate({}, first, second, adjudicator), Error);
}

TEST_CASE("a two-annotator study reaches the expected rate") {
  std::vector<AnnotationItem> items;
  std::map<size_t, Response> first, second, adjudicator;
  for (size_t id = 1; id <= 200; ++id) {
    AnnotationItem item;
    item.id = id;
    item.head = normalize_concept("h" + std::to_string(id));
    item.tail = normalize_concept("t" + std::to_string(id));
    item.candidate_relation = "HasA";
    items.push_back(item);
    if (id <= 174) {
      first[id] = second[id] = Response::NotApplies;
    } else if (id <= 178) {
      first[id] = second[id] = Response::NotSure;
    } else {
      first[id] = Response::Applies;
      second[id] = Response::NotApplies;
      adjudicator[id] = id <= 190 ? Response::Applies : Response::NotApplies;
    }
  }
  MergeResult merged = agreement_and_adjudicate(items, first, second, adjudicator);
  CHECK(merged.total == 200);
  CHECK(merged.agreeing == 178);
  CHECK(merged.agreement_rate == 0.89);
  CHECK(merged.applies == 12);
  CHECK(merged.not_applies == 184);
  CHECK(merged.not_sure == 4);

  std::string json = merge_to_json(merged);
  CHECK(json.find("\"agreement_rate\": 0.89") != std::string::npos);
  CHECK(json.find("two not-sure responses included") != std::string::npos);
  CHECK(json.find("\"applies\": 12") != std::string::npos);
  CHECK(json.find("\"200\": \"not_applies\"") != std::string::npos);
}
