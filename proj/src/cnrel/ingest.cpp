#include "cnrel/ingest.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace cnrel {

namespace {

bool has_language(std::string_view uri, const std::string& language) {
  // "/c/en/..." with an exact language segment match.
  if (uri.size() < 4 || uri.substr(0, 3) != "/c/") return false;
  size_t lang_end = uri.find('/', 3);
  if (lang_end == std::string_view::npos) return false;
  return uri.substr(3, lang_end - 3) == language;
}

std::string strip_relation(std::string_view uri) {
  if (uri.size() > 3 && uri.substr(0, 3) == "/r/") uri = uri.substr(3);
  while (!uri.empty() && uri.back() == '/') uri = uri.substr(0, uri.size() - 1);
  return std::string(uri);
}

}  // namespace

std::string ParseStats::to_json() const {
  nlohmann::ordered_json j;
  j["rows_read"] = rows_read;
  j["parsed"] = parsed;
  j["skipped_malformed"] = skipped_malformed;
  j["skipped_language"] = skipped_language;
  j["skipped_source"] = skipped_source;
  return j.dump();
}

std::string IngestStats::to_json() const {
  nlohmann::ordered_json j;
  j["rows_read"] = parse.rows_read;
  j["parsed"] = parse.parsed;
  j["skipped_malformed"] = parse.skipped_malformed;
  j["skipped_language"] = parse.skipped_language;
  j["skipped_source"] = parse.skipped_source;
  j["dropped_by_vocabulary"] = dropped_by_vocabulary;
  j["merged_duplicates"] = merged_duplicates;
  j["kept"] = kept;
  return j.dump();
}

std::vector<Triple> parse_assertions(std::istream& lines, const std::string& language,
                                     const std::string& source_filter, ParseStats* stats) {
  if (!lines) fail(ErrorKind::Io, "assertion stream unreadable");
  ParseStats local;
  ParseStats& s = stats ? *stats : local;

  std::vector<Triple> out;
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    ++s.rows_read;

    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 5) {
      ++s.skipped_malformed;
      continue;
    }
    const std::string& rel_uri = cols[1];
    const std::string& start_uri = cols[2];
    const std::string& end_uri = cols[3];
    const std::string& metadata = cols[4];

    if (!has_language(start_uri, language) || !has_language(end_uri, language)) {
      ++s.skipped_language;
      continue;
    }
    if (!source_filter.empty() && metadata.find(source_filter) == std::string::npos) {
      ++s.skipped_source;
      continue;
    }

    double weight = 0.0;
    try {
      nlohmann::json meta = nlohmann::json::parse(metadata);
      if (!meta.is_object() || !meta.contains("weight") || !meta["weight"].is_number()) {
        ++s.skipped_malformed;
        continue;
      }
      weight = meta["weight"].get<double>();
    } catch (const nlohmann::json::exception&) {
      ++s.skipped_malformed;
      continue;
    }
    if (!(weight >= 0.0)) {  // also rejects NaN
      ++s.skipped_malformed;
      continue;
    }

    Triple triple;
    triple.relation = strip_relation(rel_uri);
    if (triple.relation.empty()) {
      ++s.skipped_malformed;
      continue;
    }
    try {
      triple.head = normalize_concept(start_uri);
      triple.tail = normalize_concept(end_uri);
    } catch (const Error&) {
      ++s.skipped_malformed;
      continue;
    }
    triple.confidence = weight;
    triple.known_relation = is_known_relation(triple.relation);
    ++s.parsed;
    out.push_back(std::move(triple));
  }
  if (lines.bad()) fail(ErrorKind::Io, "assertion stream read error");
  return out;
}

std::vector<Triple> filter_by_vocabulary(const std::vector<Triple>& triples,
                                         const VocabularySet& vocab, IngestStats* stats) {
  if (vocab.tokens.empty()) {
    fail(ErrorKind::InvalidArgument, "vocabulary filter requires a non-empty vocabulary");
  }

  std::vector<Triple> out;
  std::unordered_map<std::string, size_t> seen;  // dedup key -> index in out
  size_t dropped = 0;
  size_t merged = 0;

  for (const Triple& triple : triples) {
    if (!vocab.covers(triple.head) || !vocab.covers(triple.tail)) {
      ++dropped;
      continue;
    }
    std::string key = triple.relation + '\t' + triple.head.surface + '\t' + triple.tail.surface;
    auto [it, inserted] = seen.emplace(std::move(key), out.size());
    if (inserted) {
      out.push_back(triple);
    } else {
      ++merged;
      Triple& kept = out[it->second];
      kept.confidence = std::max(kept.confidence, triple.confidence);
    }
  }

  if (stats) {
    stats->dropped_by_vocabulary += dropped;
    stats->merged_duplicates += merged;
    stats->kept = out.size();
  }
  return out;
}

VocabularySet load_vocabulary_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open vocabulary file: " + path);
  VocabularySet vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) vocab.tokens.insert(line);
  }
  return vocab;
}

void write_triples_tsv(const std::string& path, const std::vector<Triple>& triples) {
  std::ostringstream out;
  for (const Triple& t : triples) {
    out << t.relation << '\t' << t.head.surface << '\t' << t.tail.surface << '\t'
        << format_double(t.confidence) << '\n';
  }
  write_file(path, out.str());
}

std::vector<Triple> read_triples_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open triple store: " + path);
  std::vector<Triple> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols = split(line, '\t');
    if (cols.size() != 4) {
      fail(ErrorKind::Format,
           path + ":" + std::to_string(line_no) + ": expected 4 tab-separated columns");
    }
    Triple t;
    t.relation = cols[0];
    t.head = normalize_concept(cols[1]);
    t.tail = normalize_concept(cols[2]);
    t.confidence = parse_double(cols[3]);
    if (t.confidence < 0) {
      fail(ErrorKind::Format, path + ":" + std::to_string(line_no) + ": negative confidence");
    }
    t.known_relation = is_known_relation(t.relation);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace cnrel
