#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "cnrel/types.hpp"

namespace cnrel {

// Directed (head, tail) membership over a triple store.
class PairIndex {
 public:
  PairIndex() = default;
  explicit PairIndex(const std::vector<Triple>& triples);

  bool contains(const Concept& head, const Concept& tail) const;
  bool contains_either_direction(const Concept& head, const Concept& tail) const;
  size_t size() const { return pairs_.size(); }

 private:
  std::unordered_set<std::string> pairs_;
};

// Relations with strictly more than min_count triples, most frequent first.
// Frequency ties break by relation name for a stable order.
std::vector<std::string> select_target_relations(const std::vector<Triple>& triples,
                                                 size_t min_count = 2000);

struct RelationSplits {
  std::string relation;
  std::vector<Triple> test;
  std::vector<Triple> dev;
  std::vector<Triple> train;
};

// Downsamples every target relation to the size of the smallest one, then
// splits by descending confidence: the top 10% (floored) go to test, the
// next 10% to dev, the next 80% to train; the last one or two triples fall
// away when the count is not divisible by ten. The 20% most confident
// triples always survive downsampling so test and dev stay stable across
// seeds. Confidence ties order by (head, tail).
std::vector<RelationSplits> downsample_and_split(const std::vector<Triple>& triples,
                                                 const std::vector<std::string>& targets,
                                                 uint64_t seed, size_t* n_min_out = nullptr);

struct SplitInstances {
  std::vector<Instance> train;
  std::vector<Instance> dev;
  std::vector<Instance> test;
  // Triple counts feeding each split before pairs were merged.
  size_t triples_in[3] = {0, 0, 0};  // train, dev, test
};

// Merges triples sharing a (head, tail) pair into one multi-label instance
// with the union of labels and the maximum confidence. A pair seen in
// several splits keeps one instance in the highest-priority split
// (test > dev > train) so no pair leaks across splits.
SplitInstances merge_multilabels(const std::vector<RelationSplits>& splits);

// size instances labeled Other, sampled (seeded) from the low-frequency
// relations' triples. Pairs that appear in the balanced target data, and
// pairs already sampled, are rejected and redrawn.
std::vector<Instance> build_other_class(const std::vector<Triple>& cln_triples,
                                        const std::vector<std::string>& low_frequency,
                                        size_t size, uint64_t seed,
                                        const PairIndex& balanced_pairs);

// size instances labeled Random: the first size/2 are opposite pairs
// (a sampled balanced triple with head and tail swapped), the rest corrupt
// pairs (one side replaced with a concept from the same relation's pool for
// that side). A corrupt candidate is rejected when the store asserts it in
// either direction; an opposite candidate when the store asserts it as
// oriented (its reverse is the generating triple and is always present).
// Duplicates within the class are rejected. Each rejection redraws, up to
// 100 attempts per instance.
std::vector<Instance> build_random_class(const std::vector<Triple>& balanced, size_t size,
                                         uint64_t seed, const PairIndex& full_store);

// Bundles the components of one setting: CW keeps the 14 target relations,
// OW1 adds Random, OW2 adds Other and Random. Other/Random lists get their
// own seeded-shuffle 10/10/80 split. The inventory is the target list
// followed by Other then Random; splits sort by (head, tail). class_size
// is the per-relation count the targets were downsampled to.
DatasetBundle assemble_dataset(Setting setting, const std::vector<std::string>& targets,
                               const SplitInstances& balanced, std::vector<Instance> other,
                               std::vector<Instance> random_instances, uint64_t seed,
                               size_t class_size);

// train/dev/test JSON-lines files plus manifest.json under dir.
void save_bundle(const std::string& dir, const DatasetBundle& bundle);
DatasetBundle load_bundle(const std::string& dir);

}  // namespace cnrel
