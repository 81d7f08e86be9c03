// blockscope: analyze a directory of Scratch projects.

#include <iostream>

#include <CLI11.hpp>

#include "blockscope/pipeline.hpp"

namespace {

struct Flags {
  std::string input;
  std::string metadata;
  std::string out;
  std::optional<std::int64_t> seed;
  std::optional<unsigned> jobs;
  bool strict = false;
  bool embed = false;
  std::string config;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--input", f.input, "directory of .sb2/.sb3 archives");
  cmd->add_option("--metadata", f.metadata, "CSV with project_id,group,age");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "run seed (default 100)");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--strict", f.strict, "abort on the first unreadable archive");
  cmd->add_option("--config", f.config, "TOML-style settings file; flags win")->check(CLI::ExistingFile);
}

// Config file first, then explicit flags.
blockscope::RunConfig resolve(const Flags& f) {
  blockscope::RunConfig c;
  if (!f.config.empty()) blockscope::load_config_file(f.config, c);
  if (!f.input.empty()) c.input = f.input;
  if (!f.metadata.empty()) c.metadata = f.metadata;
  if (!f.out.empty()) c.out = f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.strict) c.strict = true;
  if (f.embed) c.embed = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scratch corpus analysis: metrics, smells, topics and group comparisons"};
  app.require_subcommand(1);

  Flags flags;
  auto* analyze = app.add_subcommand("analyze", "metrics.csv, smells.csv, smells_summary.csv, opcodes.csv");
  add_common(analyze, flags);
  auto* topics = app.add_subcommand("topics", "topics.json, assignments.csv, vocabulary.txt[, embedding.csv]");
  add_common(topics, flags);
  topics->add_flag("--embed", flags.embed, "also compute a 2D t-SNE embedding");
  auto* compare = app.add_subcommand("compare", "report.json, comparisons.csv, plotdata/");
  add_common(compare, flags);

  std::string archive;
  blockscope::InspectOptions inspect_opts;
  auto* inspect = app.add_subcommand("inspect", "dump AST, CFG, tokens and metrics of one archive");
  inspect->add_option("project", archive, "archive to inspect")->required();
  inspect->add_flag("--ast", inspect_opts.ast, "normalized AST as JSON");
  inspect->add_flag("--cfg", inspect_opts.cfg, "control-flow graphs (DOT)");
  inspect->add_flag("--tokens", inspect_opts.tokens, "raw and cleaned text tokens");
  inspect->add_flag("--metrics", inspect_opts.metrics, "metrics and smell counts");
  inspect->add_flag("--strict", inspect_opts.strict, "reject unsupported features");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : blockscope::kExitUsage;
  }

  if (inspect->parsed()) return blockscope::cmd_inspect(archive, inspect_opts, std::cout, std::cerr);

  blockscope::RunConfig config;
  try {
    config = resolve(flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return blockscope::kExitUsage;
  }
  try {
    if (analyze->parsed()) return blockscope::cmd_analyze(config, std::cout, std::cerr);
    if (topics->parsed()) return blockscope::cmd_topics(config, std::cout, std::cerr);
    return blockscope::cmd_compare(config, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return blockscope::kExitIngestError;
  }
}
