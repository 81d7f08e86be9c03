#pragma once

// Command implementations shared by the CLI and the end-to-end tests.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "blockscope/lda.hpp"
#include "blockscope/smells.hpp"
#include "blockscope/tsne.hpp"

namespace blockscope {

enum ExitCode : int {
  kExitOk = 0,
  kExitIngestError = 1,
  kExitEmptyCorpus = 2,
  kExitEmptyVocabulary = 3,
  kExitMissingUpstream = 4,
  kExitUsage = 64,
};

struct LdaSettings {
  long k = 10;
  long max_iterations = 10;
  long min_count = 10;
};

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path metadata;
  std::filesystem::path out = "out";
  std::int64_t seed = 100;
  unsigned jobs = 1;
  bool strict = false;
  bool embed = false;
  LdaSettings lda;
  EmbeddingConfig embedding;
  SmellConfig smells;
  long top_k = 10;

  // Throws std::invalid_argument naming the offending field.
  void validate(bool needs_input) const;
};

// Loads a TOML-style file into `config`. Recognized keys: input, metadata,
// out, seed, jobs, strict, embed, top_k; [lda] k, max_iterations, min_count;
// [embedding] perplexity, iterations, learning_rate; [smells]
// long_script_threshold, clone_min_length, clone_type3_max_gap.
void load_config_file(const std::filesystem::path& path, RunConfig& config);

std::uint64_t splitmix64(std::uint64_t x);
// Module seeds derived from the single run seed.
std::uint64_t lda_seed(const RunConfig& config);
std::uint64_t embedding_seed(const RunConfig& config);

int cmd_analyze(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_topics(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_compare(const RunConfig& config, std::ostream& out, std::ostream& err);

struct InspectOptions {
  bool ast = false;
  bool cfg = false;
  bool tokens = false;
  bool metrics = false;
  bool strict = false;
};
// All sections when none is selected.
int cmd_inspect(const std::filesystem::path& archive, const InspectOptions& options, std::ostream& out,
                std::ostream& err);

}  // namespace blockscope
