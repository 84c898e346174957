#pragma once

#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "cnrel/common.hpp"

namespace cnrel {

// A node in the knowledge graph: a word or multi-word phrase.
// tokens are lowercase and whitespace-free; surface is the tokens joined
// by underscores.
struct Concept {
  std::vector<std::string> tokens;
  std::string surface;

  bool multiword() const { return tokens.size() > 1; }
  bool operator==(const Concept& other) const { return surface == other.surface; }
};

// Lowercase + split on underscores/whitespace; accepts either a bare surface
// form ("lift heavy things") or a ConceptNet concept URI ("/c/en/cat/n",
// where trailing sense segments are dropped).
Concept normalize_concept(std::string_view uri_or_surface);

// One directed assertion. known_relation marks membership in the standard
// 37-relation inventory; unknown names are kept and routed to Other later.
struct Triple {
  std::string relation;
  Concept head;
  Concept tail;
  double confidence = 0.0;
  bool known_relation = true;
};

struct VocabularySet {
  std::unordered_set<std::string> tokens;

  bool contains(const std::string& token) const { return tokens.count(token) > 0; }
  // Phrase-first membership: the full underscore-joined surface counts as a
  // single entry when present; otherwise every token must be known.
  bool covers(const Concept& item) const;
};

// A concept pair carrying every relation label that holds for it.
struct Instance {
  Concept head;
  Concept tail;
  std::vector<std::string> labels;  // sorted by inventory order at build time
  double confidence = 0.0;
  std::vector<Triple> provenance;

  bool has_label(const std::string& relation) const;
};

enum class Setting { CW, OW1, OW2 };

std::string setting_name(Setting setting);
Setting parse_setting(std::string_view name);

struct DatasetBundle {
  Setting setting = Setting::CW;
  std::vector<std::string> inventory;
  std::vector<Instance> train;
  std::vector<Instance> dev;
  std::vector<Instance> test;
  uint64_t seed = 0;
  // Per-split triple counts before multi-label merging, indexed train/dev/test.
  size_t triples_before_merge[3] = {0, 0, 0};
  size_t class_size = 0;  // per-relation instance count after downsampling

  const std::vector<Instance>& split(std::string_view name) const;
};

inline constexpr const char* kOtherLabel = "Other";
inline constexpr const char* kRandomLabel = "Random";

// The 37 relation names of the source graph's current release.
const std::vector<std::string>& relation_inventory();
bool is_known_relation(const std::string& name);

// The 21 low-frequency relations that feed the Other class.
const std::vector<std::string>& low_frequency_relations();

}  // namespace cnrel
