#include "cnrel/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "cnrel/common.hpp"

namespace cnrel {

namespace {

// Pronounceable token: family prefix plus two or three syllables.
std::string make_word(Rng& rng, char prefix) {
  static const char* vowels = "aeiou";
  static const char* consonants = "bdfgklmnprstvz";
  std::string word(1, prefix);
  size_t syllables = 2 + rng.index(2);
  for (size_t s = 0; s < syllables; ++s) {
    word += vowels[rng.index(5)];
    word += consonants[rng.index(14)];
  }
  word += vowels[rng.index(5)];
  return word;
}

std::vector<std::string> make_family_tokens(Rng& rng, char prefix, size_t count) {
  std::vector<std::string> tokens;
  std::unordered_set<std::string> seen;
  while (tokens.size() < count) {
    std::string word = make_word(rng, prefix);
    if (seen.insert(word).second) tokens.push_back(std::move(word));
  }
  return tokens;
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::string concept_uri(const std::string& surface) {
  std::string uri = "/c/en/";
  for (char c : surface) uri += c == ' ' ? '_' : c;
  return uri;
}

void emit_assertion(std::ostringstream& out, const std::string& relation,
                    const std::string& head, const std::string& tail, double weight) {
  out << "/a/[/r/" << relation << "/," << concept_uri(head) << "/," << concept_uri(tail) << "/]\t"
      << "/r/" << relation << '\t' << concept_uri(head) << '\t' << concept_uri(tail) << '\t'
      << R"({"dataset": "/d/conceptnet/4/en", "sources": ["/s/contributor/omcs/dev"], "weight": )"
      << format_double(weight) << "}\n";
}

struct Family {
  std::string name;
  std::vector<std::string> concepts;  // space-separated surfaces
};

}  // namespace

MiniCorpus make_mini_corpus(uint64_t seed) {
  Rng rng(mix_seed(seed, "mini"));

  // Disjoint token families; each family also gets two-token concepts with a
  // quality-family modifier.
  const std::vector<std::pair<std::string, char>> family_defs = {
      {"tool", 't'},   {"task", 'k'},     {"animal", 'm'},   {"place", 'p'},
      {"food", 'f'},   {"quality", 'q'},  {"person", 'n'},   {"skill", 's'},
      {"event", 'v'},  {"bodypart", 'b'}, {"material", 'd'}, {"treatment", 'g'}};

  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(family_defs.size());
  for (const auto& [name, prefix] : family_defs) {
    tokens.push_back(make_family_tokens(rng, prefix, 48));
  }
  const std::vector<std::string>& qualities = tokens[5];

  std::vector<Family> families;
  for (size_t fam = 0; fam < family_defs.size(); ++fam) {
    Family family;
    family.name = family_defs[fam].first;
    for (size_t i = 0; i < 40; ++i) family.concepts.push_back(tokens[fam][i]);
    std::set<std::pair<size_t, size_t>> used;
    while (used.size() < 20) {
      size_t q = rng.index(40);
      size_t noun = 40 + rng.index(8);
      if (!used.insert({q, noun}).second) continue;
      family.concepts.push_back(qualities[q] + ' ' + tokens[fam][noun]);
    }
    families.push_back(std::move(family));
  }

  auto family_index = [&](const std::string& name) {
    for (size_t i = 0; i < families.size(); ++i) {
      if (families[i].name == name) return i;
    }
    fail(ErrorKind::Internal, "unknown family " + name);
  };

  struct RelationPlan {
    std::string relation;
    std::string head_family;
    std::string tail_family;
    size_t count;
  };
  const std::vector<RelationPlan> plans = {
      {"UsedFor", "tool", "task", 260},
      {"AtLocation", "animal", "place", 252},
      {"HasProperty", "food", "quality", 244},
      {"CapableOf", "person", "skill", 236},
      {"Desires", "person", "food", 228},
      {"Causes", "event", "event", 220},
      {"HasA", "animal", "bodypart", 212},
      {"ReceivesAction", "tool", "treatment", 200},
      {"MadeOf", "tool", "material", 45},
      {"PartOf", "bodypart", "animal", 45},
      {"Synonym", "quality", "quality", 45},
      {"RelatedTo", "food", "event", 45},
      {"CreatedBy", "food", "person", 45},
      {"DefinedAs", "skill", "quality", 45}};

  struct Row {
    std::string relation;
    std::string head;
    std::string tail;
    double weight;
  };
  std::vector<Row> rows;
  for (const RelationPlan& plan : plans) {
    const Family& heads = families[family_index(plan.head_family)];
    const Family& tails = families[family_index(plan.tail_family)];
    std::set<std::pair<size_t, size_t>> used;
    while (used.size() < plan.count) {
      size_t h = rng.index(heads.concepts.size());
      size_t t = rng.index(tails.concepts.size());
      if (heads.concepts[h] == tails.concepts[t]) continue;
      if (!used.insert({h, t}).second) continue;
      rows.push_back({plan.relation, heads.concepts[h], tails.concepts[t],
                      round3(0.5 + 9.5 * rng.real())});
    }
  }
  rng.shuffle(rows);

  std::ostringstream tsv;
  size_t junk_gap = rows.size() / 9;
  for (size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    emit_assertion(tsv, row.relation, row.head, row.tail, row.weight);
    if (i % junk_gap != junk_gap - 1) continue;
    switch (i / junk_gap) {
      case 0:  // wrong language on one side
        tsv << "/a/x\t/r/UsedFor\t/c/de/hund\t" << concept_uri(rows[0].tail)
            << "\t{\"sources\": [\"/s/contributor/omcs/dev\"], \"weight\": 1.0}\n";
        break;
      case 1:  // truncated record
        tsv << "/a/x\t/r/UsedFor\t" << concept_uri(rows[0].head) << '\t'
            << concept_uri(rows[0].tail) << '\n';
        break;
      case 2:  // negative confidence
        emit_assertion(tsv, "UsedFor", rows[1].head, rows[1].tail, -2.0);
        break;
      case 3:  // non-numeric confidence
        tsv << "/a/x\t/r/UsedFor\t" << concept_uri(rows[2].head) << '\t'
            << concept_uri(rows[2].tail)
            << "\t{\"sources\": [\"/s/contributor/omcs/dev\"], \"weight\": \"high\"}\n";
        break;
      case 4:  // different contributor project
        tsv << "/a/x\t/r/UsedFor\t" << concept_uri(rows[3].head) << '\t'
            << concept_uri(rows[3].tail)
            << "\t{\"sources\": [\"/s/resource/wiktionary/en\"], \"weight\": 1.0}\n";
        break;
      case 5:  // concept outside the embedding vocabulary
        emit_assertion(tsv, "UsedFor", "wholly unseen words", rows[4].tail, 3.0);
        break;
      case 6:  // duplicate assertion at lower confidence
        emit_assertion(tsv, rows[5].relation, rows[5].head, rows[5].tail,
                       round3(rows[5].weight / 2.0));
        break;
      case 7:  // empty line
        tsv << '\n';
        break;
      default: break;
    }
  }

  // Clustered vectors: family centroid plus per-token noise. A few phrase
  // rows exercise whole-surface lookup.
  EmbeddingStore store;
  constexpr size_t kDim = 25;
  for (size_t fam = 0; fam < tokens.size(); ++fam) {
    std::vector<double> base(kDim);
    for (double& v : base) v = 2.0 * rng.normal();
    for (const std::string& token : tokens[fam]) {
      std::vector<double> vec(kDim);
      for (size_t d = 0; d < kDim; ++d) vec[d] = round3(base[d] + 0.4 * rng.normal());
      store.add(token, std::move(vec));
    }
  }
  for (size_t fam = 0; fam < families.size() && fam < 4; ++fam) {
    const std::string& phrase = families[fam].concepts[45];
    std::string surface;
    for (char c : phrase) surface += c == ' ' ? '_' : c;
    std::vector<double> vec(kDim);
    for (size_t d = 0; d < kDim; ++d) vec[d] = round3(1.5 * rng.normal());
    store.add(surface, std::move(vec));
  }

  return {tsv.str(), serialize_embeddings_text(store)};
}

std::vector<Triple> make_balanced_fixture(uint64_t seed) {
  Rng rng(mix_seed(seed, "balanced"));

  const std::vector<std::string> targets = {
      "UsedFor",     "AtLocation",      "HasSubevent",      "CapableOf",
      "HasPrerequisite", "IsA",         "Causes",           "MotivatedByGoal",
      "HasProperty", "ReceivesAction",  "HasA",             "CausesDesire",
      "HasFirstSubevent", "Desires"};
  const std::vector<std::string> low_frequency = {"MadeOf",    "PartOf",    "Synonym",
                                                  "RelatedTo", "CreatedBy", "DefinedAs"};

  std::vector<Triple> triples;
  auto add_relation = [&](const std::string& relation, size_t count) {
    std::string stem = lowercase(relation);
    std::set<std::pair<size_t, size_t>> used;
    while (used.size() < count) {
      size_t h = rng.index(900);
      size_t t = rng.index(900);
      if (!used.insert({h, t}).second) continue;
      Triple triple;
      triple.relation = relation;
      triple.head = normalize_concept(stem + "h" + std::to_string(h));
      triple.tail = normalize_concept(stem + "t" + std::to_string(t));
      triple.confidence = 0.5 + 9.5 * rng.real();
      triple.known_relation = true;
      triples.push_back(std::move(triple));
    }
  };

  // Distinct counts descending in list order; the minimum is exactly 2586.
  for (size_t i = 0; i < targets.size(); ++i) {
    add_relation(targets[i], 2586 + 37 * (targets.size() - 1 - i));
  }
  for (const std::string& relation : low_frequency) add_relation(relation, 700);
  return triples;
}

SeparableData make_separable_dataset(uint64_t seed, size_t train_count, size_t dev_count,
                                     size_t test_count, double margin) {
  if (margin <= 0.0 || margin >= 1.0) {
    fail(ErrorKind::InvalidArgument, "margin must lie in (0, 1)");
  }
  Rng rng(mix_seed(seed, "separable"));

  constexpr size_t kDim = 8;
  constexpr size_t kTokens = 160;
  SeparableData data;
  for (size_t i = 0; i < kTokens; ++i) {
    std::vector<double> vec(kDim);
    for (double& v : vec) v = rng.normal();
    data.store.add("x" + std::to_string(i), std::move(vec));
  }

  // Two fixed unit normals over the concatenated pair vector.
  std::vector<std::vector<double>> normals(2, std::vector<double>(2 * kDim));
  for (auto& w : normals) {
    double norm = 0.0;
    for (double& v : w) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (double& v : w) v /= norm;
  }

  data.bundle.setting = Setting::CW;
  data.bundle.inventory = {"Alpha", "Beta"};
  data.bundle.seed = seed;

  std::unordered_set<std::string> used;
  size_t total = train_count + dev_count + test_count;
  size_t attempts = 0;
  while (data.bundle.train.size() + data.bundle.dev.size() + data.bundle.test.size() < total) {
    if (++attempts > 200 * total) {
      fail(ErrorKind::Generation, "margin too wide to fill the separable dataset");
    }
    size_t h = rng.index(kTokens);
    size_t t = rng.index(kTokens);
    if (h == t) continue;
    std::string key = std::to_string(h) + ':' + std::to_string(t);
    if (used.count(key)) continue;

    const std::vector<double>& eh = data.store.vector_at(h);
    const std::vector<double>& et = data.store.vector_at(t);
    double norm = 0.0;
    for (double v : eh) norm += v * v;
    for (double v : et) norm += v * v;
    norm = std::sqrt(norm);

    double score[2];
    bool in_band = false;
    for (size_t k = 0; k < 2; ++k) {
      double dot = 0.0;
      for (size_t d = 0; d < kDim; ++d) {
        dot += normals[k][d] * eh[d] + normals[k][kDim + d] * et[d];
      }
      score[k] = dot / norm;
      if (std::abs(score[k]) <= margin) in_band = true;
    }
    if (in_band) continue;
    used.insert(key);

    Instance inst;
    inst.head = normalize_concept(data.store.token_at(h));
    inst.tail = normalize_concept(data.store.token_at(t));
    if (score[0] > 0.0) inst.labels.push_back("Alpha");
    if (score[1] > 0.0) inst.labels.push_back("Beta");
    inst.confidence = 1.0;

    if (data.bundle.train.size() < train_count) {
      data.bundle.train.push_back(std::move(inst));
    } else if (data.bundle.dev.size() < dev_count) {
      data.bundle.dev.push_back(std::move(inst));
    } else {
      data.bundle.test.push_back(std::move(inst));
    }
  }
  return data;
}

}  // namespace cnrel
