#include "cnrel/embed.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>

namespace cnrel {

namespace {

bool parse_count_dim(const std::string& line, size_t* count, size_t* dim) {
  std::vector<std::string> fields = split_whitespace(line);
  if (fields.size() != 2) return false;
  try {
    size_t pos = 0;
    unsigned long long c = std::stoull(fields[0], &pos);
    if (pos != fields[0].size()) return false;
    unsigned long long d = std::stoull(fields[1], &pos);
    if (pos != fields[1].size()) return false;
    if (c == 0 || d == 0) return false;
    *count = c;
    *dim = d;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void check_finite(const std::vector<double>& values, const std::string& token) {
  for (double v : values) {
    if (!std::isfinite(v)) fail(ErrorKind::Format, "non-finite embedding value for '" + token + "'");
  }
}

}  // namespace

size_t EmbeddingStore::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? npos : it->second;
}

void EmbeddingStore::add(std::string token, std::vector<double> values) {
  if (token.empty()) fail(ErrorKind::Format, "empty embedding token");
  if (dim_ == 0) {
    if (values.empty()) fail(ErrorKind::Format, "empty embedding vector for '" + token + "'");
    dim_ = values.size();
  } else if (values.size() != dim_) {
    fail(ErrorKind::Format, "embedding row for '" + token + "' has " +
                                std::to_string(values.size()) + " values, expected " +
                                std::to_string(dim_));
  }
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (!inserted) fail(ErrorKind::Format, "duplicate embedding token '" + token + "'");
  (void)it;
  tokens_.push_back(std::move(token));
  vectors_.push_back(std::move(values));
}

EmbeddingStore load_embeddings_text(std::istream& in, std::optional<size_t> limit) {
  EmbeddingStore store;
  std::string line;
  bool first = true;
  size_t declared_count = 0;
  size_t declared_dim = 0;
  bool has_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (parse_count_dim(line, &declared_count, &declared_dim)) {
        has_header = true;
        continue;
      }
    }
    if (limit && store.size() >= *limit) break;
    std::vector<std::string> fields = split_whitespace(line);
    if (fields.size() < 2) fail(ErrorKind::Format, "embedding row with no values: '" + line + "'");
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (size_t i = 1; i < fields.size(); ++i) values.push_back(parse_double(fields[i]));
    check_finite(values, fields[0]);
    if (has_header && values.size() != declared_dim) {
      fail(ErrorKind::Format, "embedding row for '" + fields[0] + "' has " +
                                  std::to_string(values.size()) + " values, header declares " +
                                  std::to_string(declared_dim));
    }
    store.add(std::move(fields[0]), std::move(values));
  }
  if (in.bad()) fail(ErrorKind::Io, "embedding stream read error");
  if (store.empty()) fail(ErrorKind::Format, "embedding file holds no vectors");
  return store;
}

EmbeddingStore load_embeddings_binary(std::istream& in, std::optional<size_t> limit) {
  std::string header;
  if (!std::getline(in, header)) fail(ErrorKind::Format, "binary embedding file missing header");
  size_t count = 0;
  size_t dim = 0;
  if (!parse_count_dim(header, &count, &dim)) {
    fail(ErrorKind::Format, "binary embedding header must be 'count dim', got '" + header + "'");
  }
  if (limit && *limit < count) count = *limit;

  EmbeddingStore store;
  std::vector<float> row(dim);
  for (size_t i = 0; i < count; ++i) {
    std::string token;
    char c = 0;
    while (in.get(c) && c != ' ') {
      if (c != '\n') token.push_back(c);
    }
    if (!in) fail(ErrorKind::Format, "binary embedding file truncated in entry " + std::to_string(i));
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(dim * sizeof(float)));
    if (static_cast<size_t>(in.gcount()) != dim * sizeof(float)) {
      fail(ErrorKind::Format, "binary embedding file truncated in entry " + std::to_string(i));
    }
    std::vector<double> values(row.begin(), row.end());
    check_finite(values, token);
    store.add(std::move(token), std::move(values));
  }
  if (store.empty()) fail(ErrorKind::Format, "embedding file holds no vectors");
  return store;
}

EmbeddingStore load_embeddings(const std::string& path, std::optional<size_t> limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open embedding file: " + path);

  // Sniff: a binary file starts with a "count dim" line and its packed
  // float rows contain control bytes that never appear in the text format.
  std::string header;
  std::getline(in, header);
  size_t count = 0;
  size_t dim = 0;
  bool binary = false;
  if (in && parse_count_dim(header, &count, &dim)) {
    char probe[256];
    in.read(probe, sizeof(probe));
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      unsigned char b = static_cast<unsigned char>(probe[i]);
      if (b < 0x09 || (b > 0x0D && b < 0x20) || b == 0x7F) {
        binary = true;
        break;
      }
    }
  }
  in.clear();
  in.seekg(0);
  return binary ? load_embeddings_binary(in, limit) : load_embeddings_text(in, limit);
}

std::string serialize_embeddings_text(const EmbeddingStore& store) {
  std::ostringstream out;
  out << store.size() << ' ' << store.dim() << '\n';
  for (size_t row = 0; row < store.size(); ++row) {
    out << store.token_at(row);
    for (double v : store.vector_at(row)) out << ' ' << format_double(v);
    out << '\n';
  }
  return out.str();
}

void save_embeddings_text(const std::string& path, const EmbeddingStore& store) {
  write_file(path, serialize_embeddings_text(store));
}

std::vector<double> centroid_encode(const Concept& item, const EmbeddingStore& store,
                                    bool l2_normalize, EncodeStats* stats) {
  if (store.empty()) fail(ErrorKind::InvalidArgument, "centroid over an empty embedding store");

  std::vector<double> sum(store.dim(), 0.0);
  size_t resolved = 0;
  size_t phrase = store.find(item.surface);
  if (phrase != EmbeddingStore::npos) {
    sum = store.vector_at(phrase);
    resolved = 1;
  } else {
    for (const std::string& token : item.tokens) {
      size_t row = store.find(token);
      if (row == EmbeddingStore::npos) {
        if (stats) ++stats->skipped_tokens;
        continue;
      }
      const std::vector<double>& vec = store.vector_at(row);
      for (size_t i = 0; i < sum.size(); ++i) sum[i] += vec[i];
      ++resolved;
    }
    if (resolved == 0) {
      fail(ErrorKind::InvalidArgument, "concept out of vocabulary: '" + item.surface + "'");
    }
    for (double& v : sum) v /= static_cast<double>(resolved);
  }

  if (l2_normalize) {
    double norm = 0.0;
    for (double v : sum) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& v : sum) v /= norm;
    }
  }
  return sum;
}

}  // namespace cnrel
