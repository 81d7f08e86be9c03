#include "blockscope/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "blockscope/ast_json.hpp"
#include "blockscope/cfg.hpp"
#include "blockscope/ingest.hpp"
#include "blockscope/metrics.hpp"
#include "blockscope/report.hpp"
#include "blockscope/text.hpp"

namespace blockscope {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

void RunConfig::validate(bool needs_input) const {
  if (needs_input) {
    if (input.empty()) throw std::invalid_argument("--input is required");
    if (!fs::is_directory(input)) throw std::invalid_argument("input is not a directory: " + input.string());
  }
  if (!metadata.empty() && !fs::is_regular_file(metadata)) {
    throw std::invalid_argument("metadata file not found: " + metadata.string());
  }
  if (out.empty()) throw std::invalid_argument("--out must not be empty");
  if (seed < 1) throw std::invalid_argument("seed must be positive");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (lda.k < 1) throw std::invalid_argument("lda.k must be >= 1");
  if (lda.max_iterations < 1) throw std::invalid_argument("lda.max_iterations must be >= 1");
  if (lda.min_count < 1) throw std::invalid_argument("lda.min_count must be >= 1");
  if (top_k < 1) throw std::invalid_argument("top_k must be >= 1");
  embedding.validate();
  smells.validate();
}

namespace {

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long x = std::stol(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config key " + key + ": expected an integer, got '" + v + "'");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config key " + key + ": expected a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config key " + key + ": expected true or false, got '" + v + "'");
}

std::size_t positive(const std::string& key, long v) {
  if (v < 1) throw std::invalid_argument("config key " + key + " must be >= 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

void load_config_file(const fs::path& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path.string());
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw std::invalid_argument("config file " + path.string() + ": " + e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string key = item.fullname();
    if (item.inputs.size() != 1) throw std::invalid_argument("config key " + key + ": expected a single value");
    const std::string& v = item.inputs.front();
    if (key == "input") c.input = v;
    else if (key == "metadata") c.metadata = v;
    else if (key == "out") c.out = v;
    else if (key == "seed") c.seed = to_long(key, v);
    else if (key == "jobs") c.jobs = static_cast<unsigned>(positive(key, to_long(key, v)));
    else if (key == "strict") c.strict = to_bool(key, v);
    else if (key == "embed") c.embed = to_bool(key, v);
    else if (key == "top_k") c.top_k = to_long(key, v);
    else if (key == "lda.k") c.lda.k = to_long(key, v);
    else if (key == "lda.max_iterations") c.lda.max_iterations = to_long(key, v);
    else if (key == "lda.min_count") c.lda.min_count = to_long(key, v);
    else if (key == "embedding.perplexity") c.embedding.perplexity = to_double(key, v);
    else if (key == "embedding.iterations") c.embedding.iterations = positive(key, to_long(key, v));
    else if (key == "embedding.learning_rate") c.embedding.learning_rate = to_double(key, v);
    else if (key == "smells.long_script_threshold") c.smells.long_script_threshold = positive(key, to_long(key, v));
    else if (key == "smells.clone_min_length") c.smells.clone_min_length = positive(key, to_long(key, v));
    else if (key == "smells.clone_type3_max_gap") c.smells.clone_type3_max_gap = positive(key, to_long(key, v));
    else throw std::invalid_argument("unknown config key " + key);
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// The LDA seed is the run seed itself so that the default run uses random
// state 100; other modules get a splitmix64-derived stream.
std::uint64_t lda_seed(const RunConfig& c) { return static_cast<std::uint64_t>(c.seed); }
std::uint64_t embedding_seed(const RunConfig& c) { return splitmix64(static_cast<std::uint64_t>(c.seed) + 1); }

namespace {

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < n; i = next++) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

Json diagnostic_json(const Diagnostic& d) {
  return {{"level", d.excludes_project ? "error" : "warning"},
          {"archive", d.archive},
          {"code", d.code},
          {"message", d.message},
          {"excluded", d.excludes_project}};
}

// Loads the corpus, mapping ingest failures to exit codes.
std::optional<Corpus> load(const RunConfig& c, std::ostream& err, int& code) {
  try {
    c.validate(true);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    code = kExitUsage;
    return std::nullopt;
  }
  try {
    fs::create_directories(c.out);
    return load_corpus(c.input, c.metadata, CorpusOptions{c.strict, c.jobs, nullptr});
  } catch (const IngestError& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    code = e.kind() == IngestErrorKind::EmptyCorpus ? kExitEmptyCorpus : kExitIngestError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    code = kExitIngestError;
  }
  return std::nullopt;
}

void write_log(const fs::path& path, const Corpus& corpus, const std::string& command) {
  auto out = open_out(path);
  for (const Diagnostic& d : corpus.warnings) out << diagnostic_json(d).dump() << '\n';
  out << Json{{"level", "info"},
              {"command", command},
              {"archives", corpus.archives_seen},
              {"projects", corpus.projects.size()},
              {"excluded", corpus.excluded_count()}}
             .dump()
      << '\n';
}

}  // namespace

int cmd_analyze(const RunConfig& c, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  auto corpus = load(c, err, code);
  if (!corpus) return code;

  const std::size_t n = corpus->projects.size();
  std::vector<MetricRecord> records(n);
  std::vector<SmellCounts> smells(n);
  std::vector<std::string> ids(n);
  parallel_for(n, c.jobs, [&](std::size_t i) {
    const Project& p = corpus->projects[i];
    records[i] = compute_metrics(p);
    smells[i] = count_findings(detect_smells(p, c.smells));
    ids[i] = p.id;
  });

  {
    auto f = open_out(c.out / "metrics.csv");
    write_metrics_csv(f, records, *corpus);
  }
  {
    auto f = open_out(c.out / "smells.csv");
    write_smells_csv(f, ids, smells, *corpus);
  }
  {
    auto f = open_out(c.out / "smells_summary.csv");
    write_smells_summary_csv(f, ids, smells, *corpus);
  }
  {
    auto f = open_out(c.out / "opcodes.csv");
    write_opcodes_csv(f, records);
  }
  write_log(c.out / "analyze.log", *corpus, "analyze");
  out << "analyzed " << n << " projects (" << corpus->excluded_count() << " excluded of " << corpus->archives_seen
      << " archives) -> " << c.out.string() << '\n';
  return kExitOk;
}

int cmd_topics(const RunConfig& c, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  auto corpus = load(c, err, code);
  if (!corpus) return code;

  const std::size_t n = corpus->projects.size();
  const StopwordConfig stopwords = StopwordConfig::defaults();
  std::vector<TokenDocument> docs(n);
  parallel_for(n, c.jobs,
               [&](std::size_t i) { docs[i] = preprocess(extract_tokens(corpus->projects[i]), stopwords); });

  DocumentTermMatrix dtm;
  try {
    dtm = build_dtm(docs, static_cast<std::size_t>(c.lda.min_count));
  } catch (const EmptyVocabulary& e) {
    err << "error: EmptyVocabulary: " << e.what() << "; lower --config lda.min_count\n";
    write_log(c.out / "topics.log", *corpus, "topics");
    return kExitEmptyVocabulary;
  }

  LdaConfig lc;
  lc.k = c.lda.k;
  lc.seed = lda_seed(c);
  lc.max_iterations = static_cast<std::size_t>(c.lda.max_iterations);
  const TopicModel model = fit_lda(dtm, lc);

  std::optional<Embedding2D> embedding;
  std::vector<std::string> warnings;
  if (c.embed) {
    if (n >= 2) {
      EmbeddingConfig ec = c.embedding;
      ec.seed = embedding_seed(c);
      embedding = tsne(model.doc_topic, ec);
      warnings = embedding->warnings;
    } else {
      warnings.push_back("embedding skipped: fewer than two documents");
    }
  }

  Json tj;
  tj["k"] = model.k;
  tj["alpha"] = model.alpha;
  tj["beta"] = model.beta;
  tj["seed"] = model.seed;
  tj["iterations"] = model.iterations;
  tj["min_count"] = c.lda.min_count;
  tj["documents"] = dtm.documents();
  tj["vocabulary_size"] = dtm.terms();
  tj["elbo"] = model.elbo_history;
  tj["empty_documents"] = Json::array();
  for (std::size_t d = 0; d < n; ++d) {
    if (model.empty_document[d]) tj["empty_documents"].push_back(model.document_ids[d]);
  }
  tj["topics"] = Json::array();
  for (std::size_t t = 0; t < model.k; ++t) {
    Json terms = Json::array();
    for (const auto& [term, w] : top_terms(model, t, 20)) terms.push_back({{"term", term}, {"weight", w}});
    tj["topics"].push_back({{"topic", t}, {"terms", std::move(terms)}});
  }
  if (embedding) {
    tj["embedding"] = {{"perplexity", c.embedding.perplexity},
                       {"iterations", c.embedding.iterations},
                       {"seed", embedding_seed(c)},
                       {"kl", embedding->kl_history.empty() ? 0.0 : embedding->kl_history.back().second}};
  }
  tj["warnings"] = warnings;
  {
    auto f = open_out(c.out / "topics.json");
    f << tj.dump(2) << '\n';
  }
  {
    auto f = open_out(c.out / "vocabulary.txt");
    for (const std::string& term : model.vocabulary) f << term << '\n';
  }
  {
    auto f = open_out(c.out / "assignments.csv");
    CsvRow header{"project_id", "group", "dominant_topic", "probability"};
    for (std::size_t t = 0; t < model.k; ++t) header.push_back("topic_" + std::to_string(t));
    if (embedding) {
      header.emplace_back("x");
      header.emplace_back("y");
    }
    write_csv_row(f, header);
    for (std::size_t d = 0; d < n; ++d) {
      const auto [topic, prob] = dominant_topic(model, d);
      CsvRow row{model.document_ids[d], corpus->meta(model.document_ids[d]).group, std::to_string(topic),
                 format_number(prob)};
      for (std::size_t t = 0; t < model.k; ++t) row.push_back(format_number(model.doc_topic(d, t)));
      if (embedding) {
        row.push_back(format_number(embedding->coords[d][0]));
        row.push_back(format_number(embedding->coords[d][1]));
      }
      write_csv_row(f, row);
    }
  }
  if (embedding) {
    auto f = open_out(c.out / "embedding.csv");
    write_csv_row(f, {"project_id", "group", "dominant_topic", "x", "y"});
    for (std::size_t d = 0; d < n; ++d) {
      write_csv_row(f, {model.document_ids[d], corpus->meta(model.document_ids[d]).group,
                        std::to_string(dominant_topic(model, d).first), format_number(embedding->coords[d][0]),
                        format_number(embedding->coords[d][1])});
    }
  }
  write_log(c.out / "topics.log", *corpus, "topics");
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  out << "fitted " << model.k << " topics over " << dtm.documents() << " documents and " << dtm.terms()
      << " terms -> " << c.out.string() << '\n';
  return kExitOk;
}

int cmd_compare(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    c.validate(false);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  ReportInputs inputs;
  try {
    inputs = read_report_inputs(c.out, static_cast<std::size_t>(c.top_k));
  } catch (const MissingUpstream& e) {
    if (c.input.empty()) {
      err << "error: MissingUpstream: " << e.name() << " not found in " << c.out.string()
          << " (run analyze first or pass --input)\n";
      return kExitMissingUpstream;
    }
    if (int rc = cmd_analyze(c, out, err); rc != kExitOk) return rc;
    inputs = read_report_inputs(c.out, static_cast<std::size_t>(c.top_k));
  }
  const ReportBundle bundle = summarize_groups(inputs);
  write_report(c.out, bundle);
  print_summary(out, bundle);
  return kExitOk;
}

int cmd_inspect(const fs::path& archive, const InspectOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<Diagnostic> diags;
  Project p;
  try {
    p = load_project(archive, &diags, LoadOptions{o.strict, nullptr});
  } catch (const IngestError& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return kExitIngestError;
  }
  const bool all = !(o.ast || o.cfg || o.tokens || o.metrics);
  for (const Diagnostic& d : diags) err << "warning: " << d.code << ": " << d.message << '\n';
  if (all || o.ast) out << "# ast\n" << to_json(p).dump(2) << '\n';
  if (all || o.cfg) {
    out << "# cfg\n";
    for (const Sprite* s : targets(p)) {
      for (std::size_t i = 0; i < s->scripts.size(); ++i) {
        const ScriptCfg g = build_script_cfg(s->scripts[i]);
        out << s->name << " script " << i << " (" << s->scripts[i].hat.opcode << "): CC=" << g.cyclomatic() << '\n';
      }
    }
    out << to_dot(build_interprocedural_cfg(p), p.id) << '\n';
  }
  if (all || o.tokens) {
    const TokenDocument raw = extract_tokens(p);
    const TokenDocument clean = preprocess(raw, StopwordConfig::defaults());
    out << "# tokens\nraw:";
    for (const std::string& t : raw.tokens) out << ' ' << t;
    out << "\nclean:";
    for (const std::string& t : clean.tokens) out << ' ' << t;
    out << '\n';
  }
  if (all || o.metrics) {
    const MetricRecord r = compute_metrics(p);
    const auto cols = metric_columns();
    const auto vals = metric_values(r);
    out << "# metrics\n";
    for (std::size_t i = 0; i < cols.size(); ++i) out << cols[i] << ": " << format_number(vals[i]) << '\n';
    const SmellCounts sc = count_findings(detect_smells(p));
    for (std::size_t i = 0; i < kSmellCount; ++i) {
      out << "smell " << to_string(kAllSmells[i]) << ": " << sc[i] << '\n';
    }
  }
  return kExitOk;
}

}  // namespace blockscope
