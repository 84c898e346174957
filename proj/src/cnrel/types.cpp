#include "cnrel/types.hpp"

#include <algorithm>

namespace cnrel {

Concept normalize_concept(std::string_view uri_or_surface) {
  std::string_view payload = uri_or_surface;
  if (payload.size() >= 3 && payload.substr(0, 3) == "/c/") {
    // "/c/<lang>/<term>[/<sense>...]" -> "<term>"
    size_t lang_end = payload.find('/', 3);
    if (lang_end == std::string_view::npos) {
      fail(ErrorKind::Format, "malformed concept URI: '" + std::string(uri_or_surface) + "'");
    }
    payload = payload.substr(lang_end + 1);
    size_t term_end = payload.find('/');
    if (term_end != std::string_view::npos) payload = payload.substr(0, term_end);
  }

  std::string lowered = lowercase(payload);
  std::replace(lowered.begin(), lowered.end(), '_', ' ');
  Concept item;
  item.tokens = split_whitespace(lowered);
  if (item.tokens.empty()) {
    fail(ErrorKind::Format, "empty concept: '" + std::string(uri_or_surface) + "'");
  }
  item.surface = join(item.tokens, "_");
  return item;
}

bool VocabularySet::covers(const Concept& item) const {
  if (contains(item.surface)) return true;
  return std::all_of(item.tokens.begin(), item.tokens.end(),
                     [this](const std::string& t) { return contains(t); });
}

bool Instance::has_label(const std::string& relation) const {
  return std::find(labels.begin(), labels.end(), relation) != labels.end();
}

std::string setting_name(Setting setting) {
  switch (setting) {
    case Setting::CW: return "CW";
    case Setting::OW1: return "OW1";
    case Setting::OW2: return "OW2";
  }
  fail(ErrorKind::Internal, "unreachable setting");
}

Setting parse_setting(std::string_view name) {
  if (name == "CW" || name == "cw") return Setting::CW;
  if (name == "OW1" || name == "ow1" || name == "OW-1") return Setting::OW1;
  if (name == "OW2" || name == "ow2" || name == "OW-2") return Setting::OW2;
  fail(ErrorKind::InvalidArgument, "unknown setting: '" + std::string(name) + "'");
}

const std::vector<Instance>& DatasetBundle::split(std::string_view name) const {
  if (name == "train") return train;
  if (name == "dev") return dev;
  if (name == "test") return test;
  fail(ErrorKind::InvalidArgument, "unknown split: '" + std::string(name) + "'");
}

const std::vector<std::string>& relation_inventory() {
  static const std::vector<std::string> inventory = {
      // High-frequency commonsense relations.
      "UsedFor", "AtLocation", "HasSubevent", "CapableOf", "HasPrerequisite",
      "IsA", "Causes", "MotivatedByGoal", "HasProperty", "ReceivesAction",
      "HasA", "CausesDesire", "HasFirstSubevent", "Desires",
      // Low-frequency relations.
      "MadeOf", "DBPedia", "RelatedTo", "Difference", "LocatedNear",
      "CreatedBy", "NotUsedFor", "FormOf", "DerivedFrom", "ObstructedBy",
      "Synonym", "PartOf", "SymbolOf", "NotDesires", "HasContext",
      "DefinedAs", "HasLastSubevent", "ExternalURL", "InstanceOf",
      "NotCapableOf", "NotHasProperty",
      // Symmetric relations that carry no instances in the cleaned subset.
      "Antonym", "DistinctFrom",
  };
  return inventory;
}

bool is_known_relation(const std::string& name) {
  static const std::unordered_set<std::string> known(relation_inventory().begin(),
                                                     relation_inventory().end());
  return known.count(name) > 0;
}

const std::vector<std::string>& low_frequency_relations() {
  static const std::vector<std::string> relations = {
      "MadeOf", "DBPedia", "RelatedTo", "Difference", "LocatedNear",
      "CreatedBy", "NotUsedFor", "FormOf", "DerivedFrom", "ObstructedBy",
      "Synonym", "PartOf", "SymbolOf", "NotDesires", "HasContext",
      "DefinedAs", "HasLastSubevent", "ExternalURL", "InstanceOf",
      "NotCapableOf", "NotHasProperty",
  };
  return relations;
}

}  // namespace cnrel
