// Writes the synthetic mini corpus used by the tests. Output is a pure
// function of the seed, so regenerating with the same seed is a no-op.

#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "cnrel/common.hpp"
#include "cnrel/fixtures.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mini corpus generator"};
  std::string out_dir = "data/mini";
  unsigned long long seed = 7;
  app.add_option("--out-dir", out_dir, "Directory for assertions.tsv and embeddings.txt");
  app.add_option("--seed", seed, "Corpus seed");
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    cnrel::MiniCorpus corpus = cnrel::make_mini_corpus(seed);
    cnrel::write_file(out_dir + "/assertions.tsv", corpus.assertions_tsv);
    cnrel::write_file(out_dir + "/embeddings.txt", corpus.embeddings_text);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  std::printf("wrote %s/assertions.tsv and %s/embeddings.txt\n", out_dir.c_str(),
              out_dir.c_str());
  return 0;
}
