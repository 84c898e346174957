#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cnrel/types.hpp"

namespace cnrel {

struct ParseStats {
  size_t rows_read = 0;
  size_t parsed = 0;
  size_t skipped_malformed = 0;  // wrong column count, bad metadata, bad weight
  size_t skipped_language = 0;
  size_t skipped_source = 0;

  std::string to_json() const;
};

struct IngestStats {
  ParseStats parse;
  size_t dropped_by_vocabulary = 0;
  size_t merged_duplicates = 0;
  size_t kept = 0;

  std::string to_json() const;
};

// Parses a raw assertion dump: tab-separated rows of
//   <edge uri> \t <relation uri> \t <start uri> \t <end uri> \t <json metadata>
// where the metadata object carries a numeric "weight". Keeps rows whose two
// concepts carry `language` and whose metadata text contains `source_filter`
// (empty filter keeps every source). Malformed rows are counted, never fatal.
std::vector<Triple> parse_assertions(std::istream& lines, const std::string& language,
                                     const std::string& source_filter, ParseStats* stats);

// Keeps the triples fully covered by the vocabulary (phrase-first lookup),
// preserving order, and merges duplicate (relation, head, tail) rows keeping
// the maximum confidence.
std::vector<Triple> filter_by_vocabulary(const std::vector<Triple>& triples,
                                         const VocabularySet& vocab,
                                         IngestStats* stats = nullptr);

// One token per line; blank lines ignored.
VocabularySet load_vocabulary_file(const std::string& path);

// Triple store serialization: "relation \t head \t tail \t confidence" rows.
void write_triples_tsv(const std::string& path, const std::vector<Triple>& triples);
std::vector<Triple> read_triples_tsv(const std::string& path);

}  // namespace cnrel
