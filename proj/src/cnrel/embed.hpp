#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cnrel/types.hpp"

namespace cnrel {

// Pretrained token vectors with a stable row order, so a store serializes
// to the same bytes it was loaded from.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  size_t dim() const { return dim_; }
  size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }

  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  // Row index of token, or npos when absent.
  size_t find(const std::string& token) const;
  const std::string& token_at(size_t row) const { return tokens_[row]; }
  const std::vector<double>& vector_at(size_t row) const { return vectors_[row]; }

  // Appends a row. First row fixes dim; later mismatches and duplicate
  // tokens are format errors.
  void add(std::string token, std::vector<double> values);

  static constexpr size_t npos = static_cast<size_t>(-1);

 private:
  size_t dim_ = 0;
  std::vector<std::string> tokens_;
  std::vector<std::vector<double>> vectors_;
  std::unordered_map<std::string, size_t> index_;
};

// Reads either the whitespace-delimited text format (optional "count dim"
// header) or the packed binary layout ("count dim\n", then per entry a
// space-terminated token followed by dim little-endian float32 values).
// The format is sniffed from the file contents. limit caps loaded entries.
EmbeddingStore load_embeddings(const std::string& path,
                               std::optional<size_t> limit = std::nullopt);
EmbeddingStore load_embeddings_text(std::istream& in, std::optional<size_t> limit = std::nullopt);
EmbeddingStore load_embeddings_binary(std::istream& in,
                                      std::optional<size_t> limit = std::nullopt);

// Canonical text form: "count dim" header, one token + shortest round-trip
// decimals per row. save(load(save(s))) is byte-identical to save(s).
std::string serialize_embeddings_text(const EmbeddingStore& store);
void save_embeddings_text(const std::string& path, const EmbeddingStore& store);

struct EncodeStats {
  size_t skipped_tokens = 0;
};

// Mean of the resolvable token vectors; the full surface wins over the
// token average when it is itself a stored phrase entry. l2_normalize
// rescales to unit length. Zero resolvable tokens is an error.
std::vector<double> centroid_encode(const Concept& item, const EmbeddingStore& store,
                                    bool l2_normalize = false, EncodeStats* stats = nullptr);

}  // namespace cnrel
