#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cnrel {

enum class ErrorKind {
  InvalidArgument,  // bad parameters, violated preconditions
  Io,               // unreadable or unwritable files
  Format,           // parseable stream with malformed structure
  Generation,       // sampling budget exhausted / size shortfall
  Numeric,          // non-finite values in numeric code
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

// Deterministic RNG wrapper. The standard distributions are
// implementation-defined, so index/real/normal draws are derived from the
// raw engine output to keep artifacts reproducible across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  size_t index(size_t n);

  // Uniform real in [0, 1).
  double real();

  // Standard normal via Box-Muller.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (size_t i = v.size() - 1; i > 0; --i) {
      std::swap(v[i], v[index(i + 1)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stable sub-seed for a named stream (e.g. one relation's sampler), so the
// draw sequence does not depend on processing order.
uint64_t mix_seed(uint64_t seed, std::string_view stream);

// Shortest round-trip decimal form, locale-independent.
std::string format_double(double value);
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string lowercase(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);

}  // namespace cnrel
