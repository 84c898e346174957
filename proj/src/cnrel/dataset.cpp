#include "cnrel/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace cnrel {

namespace {

std::string pair_key(const Concept& head, const Concept& tail) {
  return head.surface + '\t' + tail.surface;
}

bool confidence_order(const Triple& a, const Triple& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.head.surface != b.head.surface) return a.head.surface < b.head.surface;
  return a.tail.surface < b.tail.surface;
}

bool pair_order(const Instance& a, const Instance& b) {
  if (a.head.surface != b.head.surface) return a.head.surface < b.head.surface;
  return a.tail.surface < b.tail.surface;
}

size_t tenth(size_t n) { return n / 10; }

// Sorts labels by bundle inventory position.
void order_labels(std::vector<Instance>& instances, const std::vector<std::string>& inventory) {
  std::unordered_map<std::string, size_t> rank;
  for (size_t i = 0; i < inventory.size(); ++i) rank[inventory[i]] = i;
  for (Instance& inst : instances) {
    std::sort(inst.labels.begin(), inst.labels.end(),
              [&rank](const std::string& a, const std::string& b) {
                auto ita = rank.find(a);
                auto itb = rank.find(b);
                size_t ra = ita == rank.end() ? rank.size() : ita->second;
                size_t rb = itb == rank.end() ? rank.size() : itb->second;
                if (ra != rb) return ra < rb;
                return a < b;
              });
  }
}

}  // namespace

PairIndex::PairIndex(const std::vector<Triple>& triples) {
  pairs_.reserve(triples.size());
  for (const Triple& t : triples) pairs_.insert(pair_key(t.head, t.tail));
}

bool PairIndex::contains(const Concept& head, const Concept& tail) const {
  return pairs_.count(pair_key(head, tail)) > 0;
}

bool PairIndex::contains_either_direction(const Concept& head, const Concept& tail) const {
  return contains(head, tail) || contains(tail, head);
}

std::vector<std::string> select_target_relations(const std::vector<Triple>& triples,
                                                 size_t min_count) {
  if (triples.empty()) fail(ErrorKind::InvalidArgument, "cannot select relations from no triples");
  std::unordered_map<std::string, size_t> counts;
  for (const Triple& t : triples) ++counts[t.relation];

  std::vector<std::pair<std::string, size_t>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> out;
  for (const auto& [relation, count] : ranked) {
    if (count > min_count) out.push_back(relation);
  }
  return out;
}

std::vector<RelationSplits> downsample_and_split(const std::vector<Triple>& triples,
                                                 const std::vector<std::string>& targets,
                                                 uint64_t seed, size_t* n_min_out) {
  if (targets.empty()) fail(ErrorKind::InvalidArgument, "no target relations");

  std::unordered_map<std::string, std::vector<Triple>> by_relation;
  for (const Triple& t : triples) {
    if (std::find(targets.begin(), targets.end(), t.relation) != targets.end()) {
      by_relation[t.relation].push_back(t);
    }
  }

  size_t n_min = static_cast<size_t>(-1);
  for (const std::string& relation : targets) {
    size_t n = by_relation[relation].size();
    if (n < 10) {
      fail(ErrorKind::InvalidArgument,
           "relation '" + relation + "' has " + std::to_string(n) + " triples, need at least 10");
    }
    n_min = std::min(n_min, n);
  }

  if (n_min_out) *n_min_out = n_min;

  size_t block = tenth(n_min);
  size_t protect = 2 * block;
  size_t train_size = n_min * 8 / 10;

  std::vector<RelationSplits> out;
  out.reserve(targets.size());
  for (const std::string& relation : targets) {
    std::vector<Triple>& pool = by_relation[relation];
    std::sort(pool.begin(), pool.end(), confidence_order);

    // Keep the protected head; sample the rest of the quota from the tail.
    std::vector<Triple> kept(pool.begin(), pool.begin() + protect);
    std::vector<size_t> rest(pool.size() - protect);
    for (size_t i = 0; i < rest.size(); ++i) rest[i] = protect + i;
    Rng rng(mix_seed(seed, "downsample:" + relation));
    rng.shuffle(rest);
    rest.resize(n_min - protect);
    std::sort(rest.begin(), rest.end());
    for (size_t idx : rest) kept.push_back(pool[idx]);
    std::sort(kept.begin(), kept.end(), confidence_order);

    RelationSplits splits;
    splits.relation = relation;
    splits.test.assign(kept.begin(), kept.begin() + block);
    splits.dev.assign(kept.begin() + block, kept.begin() + 2 * block);
    splits.train.assign(kept.begin() + 2 * block, kept.begin() + 2 * block + train_size);
    out.push_back(std::move(splits));
  }
  return out;
}

SplitInstances merge_multilabels(const std::vector<RelationSplits>& splits) {
  struct Merged {
    Instance instance;
    int best_split = 3;  // 0 test, 1 dev, 2 train
  };
  std::map<std::string, Merged> by_pair;
  SplitInstances out;

  auto absorb = [&by_pair](const std::vector<Triple>& triples, int split) {
    for (const Triple& t : triples) {
      Merged& m = by_pair[pair_key(t.head, t.tail)];
      Instance& inst = m.instance;
      if (inst.labels.empty()) {
        inst.head = t.head;
        inst.tail = t.tail;
        inst.confidence = t.confidence;
      } else {
        inst.confidence = std::max(inst.confidence, t.confidence);
      }
      if (!inst.has_label(t.relation)) inst.labels.push_back(t.relation);
      inst.provenance.push_back(t);
      m.best_split = std::min(m.best_split, split);
    }
  };
  for (const RelationSplits& rs : splits) {
    absorb(rs.test, 0);
    absorb(rs.dev, 1);
    absorb(rs.train, 2);
    out.triples_in[0] += rs.train.size();
    out.triples_in[1] += rs.dev.size();
    out.triples_in[2] += rs.test.size();
  }

  for (auto& [key, merged] : by_pair) {
    (void)key;
    switch (merged.best_split) {
      case 0: out.test.push_back(std::move(merged.instance)); break;
      case 1: out.dev.push_back(std::move(merged.instance)); break;
      default: out.train.push_back(std::move(merged.instance)); break;
    }
  }
  return out;
}

std::vector<Instance> build_other_class(const std::vector<Triple>& cln_triples,
                                        const std::vector<std::string>& low_frequency,
                                        size_t size, uint64_t seed,
                                        const PairIndex& balanced_pairs) {
  std::unordered_set<std::string> allowed(low_frequency.begin(), low_frequency.end());
  std::vector<const Triple*> pool;
  for (const Triple& t : cln_triples) {
    if (allowed.count(t.relation)) pool.push_back(&t);
  }
  if (pool.size() < size) {
    fail(ErrorKind::Generation, "Other class needs " + std::to_string(size) +
                                    " triples but only " + std::to_string(pool.size()) +
                                    " low-frequency triples are available");
  }

  Rng rng(mix_seed(seed, "other"));
  std::unordered_set<std::string> taken;
  std::vector<Instance> out;
  out.reserve(size);
  size_t attempts_left = size * 100;
  while (out.size() < size) {
    if (attempts_left-- == 0) {
      fail(ErrorKind::Generation, "Other class sampling budget exhausted at " +
                                      std::to_string(out.size()) + " of " + std::to_string(size));
    }
    const Triple& t = *pool[rng.index(pool.size())];
    if (balanced_pairs.contains(t.head, t.tail)) continue;
    if (!taken.insert(pair_key(t.head, t.tail)).second) continue;
    Instance inst;
    inst.head = t.head;
    inst.tail = t.tail;
    inst.labels = {kOtherLabel};
    inst.confidence = t.confidence;
    inst.provenance = {t};
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Instance> build_random_class(const std::vector<Triple>& balanced, size_t size,
                                         uint64_t seed, const PairIndex& full_store) {
  if (size % 2 != 0) fail(ErrorKind::InvalidArgument, "Random class size must be even");
  if (balanced.empty()) fail(ErrorKind::InvalidArgument, "Random class needs source triples");

  std::unordered_map<std::string, std::vector<const Concept*>> head_pool;
  std::unordered_map<std::string, std::vector<const Concept*>> tail_pool;
  for (const Triple& t : balanced) {
    head_pool[t.relation].push_back(&t.head);
    tail_pool[t.relation].push_back(&t.tail);
  }

  Rng rng(mix_seed(seed, "random"));
  std::unordered_set<std::string> taken;
  std::vector<Instance> out;
  out.reserve(size);

  auto emit = [&](Concept head, Concept tail, const Triple& source) {
    Instance inst;
    inst.head = std::move(head);
    inst.tail = std::move(tail);
    inst.labels = {kRandomLabel};
    inst.confidence = 0.0;
    inst.provenance = {source};
    out.push_back(std::move(inst));
  };

  const int kBudget = 100;
  for (size_t i = 0; i < size / 2; ++i) {
    int attempts = 0;
    for (;;) {
      if (++attempts > kBudget) {
        fail(ErrorKind::Generation, "opposite-pair budget exhausted at instance " +
                                        std::to_string(out.size()));
      }
      const Triple& source = balanced[rng.index(balanced.size())];
      if (source.head == source.tail) continue;
      // The reverse of this candidate is the source assertion itself, so
      // only the candidate's own orientation can disqualify it.
      if (full_store.contains(source.tail, source.head)) continue;
      if (!taken.insert(pair_key(source.tail, source.head)).second) continue;
      emit(source.tail, source.head, source);
      break;
    }
  }

  for (size_t i = 0; i < size / 2; ++i) {
    int attempts = 0;
    for (;;) {
      if (++attempts > kBudget) {
        fail(ErrorKind::Generation,
             "corrupt-pair budget exhausted at instance " + std::to_string(out.size()));
      }
      const Triple& source = balanced[rng.index(balanced.size())];
      bool replace_head = rng.index(2) == 0;
      const auto& pool = replace_head ? head_pool[source.relation] : tail_pool[source.relation];
      const Concept& swap_in = *pool[rng.index(pool.size())];
      const Concept& head = replace_head ? swap_in : source.head;
      const Concept& tail = replace_head ? source.tail : swap_in;
      if (head == tail) continue;
      if (full_store.contains_either_direction(head, tail)) continue;
      if (!taken.insert(pair_key(head, tail)).second) continue;
      emit(head, tail, source);
      break;
    }
  }
  return out;
}

DatasetBundle assemble_dataset(Setting setting, const std::vector<std::string>& targets,
                               const SplitInstances& balanced, std::vector<Instance> other,
                               std::vector<Instance> random_instances, uint64_t seed,
                               size_t class_size) {
  bool want_other = setting == Setting::OW2;
  bool want_random = setting != Setting::CW;
  if (want_other != !other.empty()) {
    fail(ErrorKind::InvalidArgument, "setting " + setting_name(setting) +
                                         (want_other ? " needs an Other component"
                                                     : " does not take an Other component"));
  }
  if (want_random != !random_instances.empty()) {
    fail(ErrorKind::InvalidArgument, "setting " + setting_name(setting) +
                                         (want_random ? " needs a Random component"
                                                      : " does not take a Random component"));
  }

  DatasetBundle bundle;
  bundle.setting = setting;
  bundle.seed = seed;
  bundle.class_size = class_size;
  bundle.inventory = targets;
  if (want_other) bundle.inventory.push_back(kOtherLabel);
  if (want_random) bundle.inventory.push_back(kRandomLabel);

  bundle.train = balanced.train;
  bundle.dev = balanced.dev;
  bundle.test = balanced.test;
  bundle.triples_before_merge[0] = balanced.triples_in[0];
  bundle.triples_before_merge[1] = balanced.triples_in[1];
  bundle.triples_before_merge[2] = balanced.triples_in[2];

  auto fold_in = [&bundle](std::vector<Instance>&& extra, std::string_view stream, uint64_t s) {
    Rng rng(mix_seed(s, stream));
    rng.shuffle(extra);
    size_t block = extra.size() / 10;
    size_t train_size = extra.size() * 8 / 10;
    for (size_t i = 0; i < block; ++i) bundle.test.push_back(std::move(extra[i]));
    for (size_t i = block; i < 2 * block; ++i) bundle.dev.push_back(std::move(extra[i]));
    for (size_t i = 2 * block; i < 2 * block + train_size; ++i) {
      bundle.train.push_back(std::move(extra[i]));
    }
    bundle.triples_before_merge[0] += train_size;
    bundle.triples_before_merge[1] += block;
    bundle.triples_before_merge[2] += block;
  };
  if (want_other) fold_in(std::move(other), "split:other", seed);
  if (want_random) fold_in(std::move(random_instances), "split:random", seed);

  std::sort(bundle.train.begin(), bundle.train.end(), pair_order);
  std::sort(bundle.dev.begin(), bundle.dev.end(), pair_order);
  std::sort(bundle.test.begin(), bundle.test.end(), pair_order);
  order_labels(bundle.train, bundle.inventory);
  order_labels(bundle.dev, bundle.inventory);
  order_labels(bundle.test, bundle.inventory);
  return bundle;
}

void save_bundle(const std::string& dir, const DatasetBundle& bundle) {
  std::filesystem::create_directories(dir);

  auto dump_split = [&dir](const std::string& name, const std::vector<Instance>& instances) {
    std::ostringstream out;
    for (const Instance& inst : instances) {
      nlohmann::ordered_json j;
      j["head"] = inst.head.surface;
      j["tail"] = inst.tail.surface;
      j["labels"] = inst.labels;
      j["confidence"] = inst.confidence;
      out << j.dump() << '\n';
    }
    write_file(dir + "/" + name + ".jsonl", out.str());
  };
  dump_split("train", bundle.train);
  dump_split("dev", bundle.dev);
  dump_split("test", bundle.test);

  nlohmann::ordered_json manifest;
  manifest["setting"] = setting_name(bundle.setting);
  manifest["inventory"] = bundle.inventory;
  manifest["seed"] = bundle.seed;
  manifest["class_size"] = bundle.class_size;
  manifest["counts"]["train"] = bundle.train.size();
  manifest["counts"]["dev"] = bundle.dev.size();
  manifest["counts"]["test"] = bundle.test.size();
  manifest["counts"]["train_triples"] = bundle.triples_before_merge[0];
  manifest["counts"]["dev_triples"] = bundle.triples_before_merge[1];
  manifest["counts"]["test_triples"] = bundle.triples_before_merge[2];
  write_file(dir + "/manifest.json", manifest.dump(2) + "\n");
}

DatasetBundle load_bundle(const std::string& dir) {
  DatasetBundle bundle;
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir + "/manifest.json"));
    bundle.setting = parse_setting(manifest.at("setting").get<std::string>());
    bundle.inventory = manifest.at("inventory").get<std::vector<std::string>>();
    bundle.seed = manifest.at("seed").get<uint64_t>();
    bundle.class_size = manifest.at("class_size").get<size_t>();
    bundle.triples_before_merge[0] = manifest.at("counts").at("train_triples").get<size_t>();
    bundle.triples_before_merge[1] = manifest.at("counts").at("dev_triples").get<size_t>();
    bundle.triples_before_merge[2] = manifest.at("counts").at("test_triples").get<size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, dir + "/manifest.json: " + e.what());
  }

  auto load_split = [&dir](const std::string& name) {
    std::ifstream in(dir + "/" + name + ".jsonl");
    if (!in) fail(ErrorKind::Io, "cannot open bundle split: " + dir + "/" + name + ".jsonl");
    std::vector<Instance> instances;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        nlohmann::json j = nlohmann::json::parse(line);
        Instance inst;
        inst.head = normalize_concept(j.at("head").get<std::string>());
        inst.tail = normalize_concept(j.at("tail").get<std::string>());
        inst.labels = j.at("labels").get<std::vector<std::string>>();
        inst.confidence = j.at("confidence").get<double>();
        if (inst.labels.empty()) fail(ErrorKind::Format, "instance with no labels");
        instances.push_back(std::move(inst));
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Format, dir + "/" + name + ".jsonl:" + std::to_string(line_no) + ": " +
                                    e.what());
      }
    }
    return instances;
  };
  bundle.train = load_split("train");
  bundle.dev = load_split("dev");
  bundle.test = load_split("test");

  std::unordered_set<std::string> known(bundle.inventory.begin(), bundle.inventory.end());
  for (const std::vector<Instance>* split : {&bundle.train, &bundle.dev, &bundle.test}) {
    for (const Instance& inst : *split) {
      for (const std::string& label : inst.labels) {
        if (!known.count(label)) {
          fail(ErrorKind::Format, "label '" + label + "' missing from bundle inventory");
        }
      }
    }
  }
  return bundle;
}

}  // namespace cnrel
