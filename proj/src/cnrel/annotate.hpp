#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cnrel/types.hpp"

namespace cnrel {

enum class Response { Applies, NotApplies, NotSure };

std::string response_name(Response response);
Response parse_response(std::string_view name);

struct AnnotationItem {
  size_t id = 0;
  Concept head;
  Concept tail;
  std::string candidate_relation;       // never one of the gold labels
  std::vector<std::string> gold_labels;  // kept out of the annotator sheet
};

// Draws n distinct instances (seeded, uniform) and pairs each with a
// relation drawn uniformly from `relations` minus the instance's gold
// labels. Instances whose gold labels cover all of `relations` are not
// eligible; asking for more items than there are eligible instances fails.
std::vector<AnnotationItem> sample_candidates(const std::vector<Instance>& pool,
                                              const std::vector<std::string>& relations,
                                              size_t n, uint64_t seed);

// Annotator-facing sheet: id,head,tail,candidate_relation,response with the
// response column left blank. Gold labels never appear.
std::string sheet_csv(const std::vector<AnnotationItem>& items);

std::string items_to_json(const std::vector<AnnotationItem>& items);
std::vector<AnnotationItem> items_from_json(const std::string& text);

// Reads a filled sheet; the first cell is the item id and the last cell the
// response, so concept text may contain commas.
std::map<size_t, Response> parse_responses(const std::string& csv_text);

struct MergeResult {
  size_t total = 0;
  size_t agreeing = 0;
  double agreement_rate = 0.0;
  size_t applies = 0;      // final decisions
  size_t not_applies = 0;
  size_t not_sure = 0;
  std::map<size_t, Response> finals;
};

// Two matching responses agree (two not-sure responses included); any other
// combination is a disagreement and must carry an adjudicator response.
MergeResult agreement_and_adjudicate(const std::vector<AnnotationItem>& items,
                                     const std::map<size_t, Response>& first,
                                     const std::map<size_t, Response>& second,
                                     const std::map<size_t, Response>& adjudicator);

// Statistics plus per-item finals; metadata records the not-sure policy.
std::string merge_to_json(const MergeResult& result);

}  // namespace cnrel
