#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cnrel/embed.hpp"
#include "cnrel/types.hpp"

namespace cnrel {

// Synthetic desk-scale corpus: eight frequent relations with distinct
// head/tail concept families, six low-frequency relations for the Other
// pool, clustered 25-dimensional token vectors, and a handful of rows the
// parser must reject. Both members are complete file bodies.
struct MiniCorpus {
  std::string assertions_tsv;
  std::string embeddings_text;
};

MiniCorpus make_mini_corpus(uint64_t seed);

// Frequent-relation count floor of the mini corpus; counts strictly above
// this select the eight targets.
inline constexpr size_t kMiniMinCount = 150;

// Triple store with the fourteen production target relations at distinct
// counts whose minimum is exactly 2586, plus six low-frequency relations
// feeding the Other pool. Concept namespaces are disjoint per relation and
// side.
std::vector<Triple> make_balanced_fixture(uint64_t seed);

// Two independent conic label rules over composed pair vectors, with a
// margin band around each boundary left empty. Learnable to near-perfect F1
// by the feed-forward model, which is positively homogeneous.
struct SeparableData {
  DatasetBundle bundle;
  EmbeddingStore store;
};

SeparableData make_separable_dataset(uint64_t seed, size_t train_count, size_t dev_count,
                                     size_t test_count, double margin);

}  // namespace cnrel
