#include "cnrel/annotate.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "cnrel/common.hpp"

namespace cnrel {

namespace {

std::string readable(const Concept& item) { return join(item.tokens, " "); }

}  // namespace

std::string response_name(Response response) {
  switch (response) {
    case Response::Applies: return "applies";
    case Response::NotApplies: return "not_applies";
    default: return "not_sure";
  }
}

Response parse_response(std::string_view name) {
  if (name == "applies") return Response::Applies;
  if (name == "not_applies") return Response::NotApplies;
  if (name == "not_sure") return Response::NotSure;
  fail(ErrorKind::Format, "unknown response: '" + std::string(name) + "'");
}

std::vector<AnnotationItem> sample_candidates(const std::vector<Instance>& pool,
                                              const std::vector<std::string>& relations,
                                              size_t n, uint64_t seed) {
  if (relations.size() < 2) {
    fail(ErrorKind::InvalidArgument, "candidate sampling needs at least two relations");
  }
  if (n == 0) fail(ErrorKind::InvalidArgument, "cannot sample zero items");

  std::vector<size_t> eligible;
  std::vector<std::vector<std::string>> legal(pool.size());
  for (size_t i = 0; i < pool.size(); ++i) {
    std::unordered_set<std::string> gold(pool[i].labels.begin(), pool[i].labels.end());
    for (const std::string& relation : relations) {
      if (!gold.count(relation)) legal[i].push_back(relation);
    }
    if (!legal[i].empty()) eligible.push_back(i);
  }
  if (n > eligible.size()) {
    fail(ErrorKind::Generation, "asked for " + std::to_string(n) + " items but only " +
                                    std::to_string(eligible.size()) +
                                    " instances have a legal candidate relation");
  }

  Rng rng(mix_seed(seed, "annotate"));
  rng.shuffle(eligible);

  std::vector<AnnotationItem> items;
  items.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    size_t i = eligible[k];
    AnnotationItem item;
    item.id = k + 1;
    item.head = pool[i].head;
    item.tail = pool[i].tail;
    item.candidate_relation = legal[i][rng.index(legal[i].size())];
    item.gold_labels = pool[i].labels;
    items.push_back(std::move(item));
  }
  return items;
}

std::string sheet_csv(const std::vector<AnnotationItem>& items) {
  std::ostringstream out;
  out << "id,head,tail,candidate_relation,response\n";
  for (const AnnotationItem& item : items) {
    out << item.id << ',' << readable(item.head) << ',' << readable(item.tail) << ','
        << item.candidate_relation << ",\n";
  }
  return out.str();
}

std::string items_to_json(const std::vector<AnnotationItem>& items) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const AnnotationItem& item : items) {
    j.push_back({{"id", item.id},
                 {"head", item.head.surface},
                 {"tail", item.tail.surface},
                 {"candidate_relation", item.candidate_relation},
                 {"gold_labels", item.gold_labels}});
  }
  return j.dump(2) + "\n";
}

std::vector<AnnotationItem> items_from_json(const std::string& text) {
  std::vector<AnnotationItem> items;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& entry : j) {
      AnnotationItem item;
      item.id = entry.at("id").get<size_t>();
      item.head = normalize_concept(entry.at("head").get<std::string>());
      item.tail = normalize_concept(entry.at("tail").get<std::string>());
      item.candidate_relation = entry.at("candidate_relation").get<std::string>();
      item.gold_labels = entry.at("gold_labels").get<std::vector<std::string>>();
      items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed annotation items: ") + e.what());
  }
  return items;
}

std::map<size_t, Response> parse_responses(const std::string& csv_text) {
  std::vector<std::string> lines = split(csv_text, '\n');
  std::map<size_t, Response> responses;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    size_t first_comma = line.find(',');
    size_t last_comma = line.rfind(',');
    if (first_comma == std::string::npos || first_comma == last_comma) {
      fail(ErrorKind::Format, "response sheet line " + std::to_string(i + 1) + " is not CSV");
    }
    size_t id;
    try {
      id = std::stoull(line.substr(0, first_comma));
    } catch (const std::exception&) {
      fail(ErrorKind::Format, "bad item id on response sheet line " + std::to_string(i + 1));
    }
    std::string cell = line.substr(last_comma + 1);
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    if (cell.empty()) {
      fail(ErrorKind::Format, "item " + std::to_string(id) + " has no response");
    }
    if (!responses.emplace(id, parse_response(cell)).second) {
      fail(ErrorKind::Format, "item " + std::to_string(id) + " answered twice");
    }
  }
  return responses;
}

namespace {

Response response_for(const std::map<size_t, Response>& responses, size_t id, const char* who) {
  auto it = responses.find(id);
  if (it == responses.end()) {
    fail(ErrorKind::InvalidArgument,
         std::string(who) + " response missing for item " + std::to_string(id));
  }
  return it->second;
}

}  // namespace

MergeResult agreement_and_adjudicate(const std::vector<AnnotationItem>& items,
                                     const std::map<size_t, Response>& first,
                                     const std::map<size_t, Response>& second,
                                     const std::map<size_t, Response>& adjudicator) {
  if (items.empty()) fail(ErrorKind::InvalidArgument, "no items to merge");

  MergeResult result;
  result.total = items.size();
  for (const AnnotationItem& item : items) {
    Response a = response_for(first, item.id, "first annotator");
    Response b = response_for(second, item.id, "second annotator");
    Response final_response;
    if (a == b) {
      ++result.agreeing;
      final_response = a;
    } else {
      auto it = adjudicator.find(item.id);
      if (it == adjudicator.end()) {
        fail(ErrorKind::InvalidArgument,
             "incomplete adjudication: item " + std::to_string(item.id) + " disagrees ("
                 + response_name(a) + " vs " + response_name(b) + ") with no adjudicator response");
      }
      final_response = it->second;
    }
    result.finals[item.id] = final_response;
    switch (final_response) {
      case Response::Applies: ++result.applies; break;
      case Response::NotApplies: ++result.not_applies; break;
      case Response::NotSure: ++result.not_sure; break;
    }
  }
  result.agreement_rate =
      static_cast<double>(result.agreeing) / static_cast<double>(result.total);
  return result;
}

std::string merge_to_json(const MergeResult& result) {
  nlohmann::ordered_json finals;
  for (const auto& [id, response] : result.finals) {
    finals[std::to_string(id)] = response_name(response);
  }
  nlohmann::ordered_json j;
  j["total"] = result.total;
  j["agreeing"] = result.agreeing;
  j["agreement_rate"] = result.agreement_rate;
  j["policy"] =
      "matching responses agree, two not-sure responses included; any other mix is a "
      "disagreement settled by the adjudicator";
  j["final_counts"] = {{"applies", result.applies},
                       {"not_applies", result.not_applies},
                       {"not_sure", result.not_sure}};
  j["finals"] = std::move(finals);
  return j.dump(2) + "\n";
}

}  // namespace cnrel
