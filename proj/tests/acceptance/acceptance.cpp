// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "blobs.hpp"
#include "blockscope/cfg.hpp"
#include "blockscope/ingest.hpp"
#include "blockscope/lda.hpp"
#include "blockscope/metrics.hpp"
#include "blockscope/pipeline.hpp"
#include "blockscope/report.hpp"
#include "blockscope/smells.hpp"
#include "blockscope/stats.hpp"
#include "blockscope/tsne.hpp"
#include "builders.hpp"
#include "corpora.hpp"
#include "fixtures.hpp"
#include "generators.hpp"
#include "icc_cases.hpp"
#include "oracles.hpp"
#include "smell_corpus.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using namespace blockscope;
using namespace testsupport;

namespace {

// Collects failure messages; only the first few are kept for printing.
class Findings {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (++failures_ <= 5) messages_.push_back(what);
  }
  bool ok() const { return failures_ == 0; }
  std::size_t failures() const { return failures_; }
  const std::vector<std::string>& messages() const { return messages_; }

 private:
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
};

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

bool same_bytes(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double max_row_error(const Matrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    auto r = m.row(i);
    worst = std::max(worst, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
  }
  return worst;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

void format_fixtures(Findings& f) {
  const auto dir = temp_dir("acceptance_fixtures");
  const auto cases = format_cases();
  f.expect(cases.size() >= 10, "fewer than 10 fixtures");
  auto scripts = [](const Project& p) {
    std::size_t n = 0;
    for (const Sprite* s : targets(p)) n += s->scripts.size();
    return n;
  };
  for (const auto& c : cases) {
    const Project sb2 = load_project(zip_fixture(dir, c.name, "sb2"));
    const Project sb3 = load_project(zip_fixture(dir, c.name, "sb3"));
    for (const Project* p : {&sb2, &sb3}) {
      const std::string tag = c.name + "." + (p == &sb2 ? "sb2" : "sb3");
      f.expect(p->sprites.size() == c.sprites, tag + ": sprite count");
      f.expect(scripts(*p) == c.scripts, tag + ": script count");
      f.expect(count_blocks(*p) == c.blocks, tag + ": block count");
    }
    Project a = sb2, b = sb3;
    a.id = a.name = b.id = b.name = "";
    a.dialect = b.dialect = Dialect::Sb3;
    f.expect(a == b, c.name + ": sb2 and sb3 ASTs differ");
  }
  fs::remove_all(dir);
}

void metric_oracles(Findings& f) {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const Project p = random_project(rng, "m" + std::to_string(i));
    const MetricRecord r = compute_metrics(p);
    const CountOracle o = brute_force_counts(p);
    const std::string tag = "project " + std::to_string(i);
    f.expect(r.block_count == o.blocks, tag + ": block_count");
    f.expect(r.category_counts == o.categories, tag + ": category counts");
    f.expect(std::accumulate(r.category_counts.begin(), r.category_counts.end(), std::size_t{0}) == o.blocks,
             tag + ": category sum");
    f.expect(r.concept_counts == o.concepts, tag + ": concept counts");

    const HalsteadMetrics& h = r.halstead;
    const HalsteadMetrics ho = halstead_oracle(p);
    f.expect(h.total_operators == ho.total_operators && h.total_operands == ho.total_operands &&
                 h.unique_operators == ho.unique_operators && h.unique_operands == ho.unique_operands,
             tag + ": Halstead counts");
    f.expect(h.length == h.total_operators + h.total_operands, tag + ": N = N1 + N2");
    f.expect(h.vocabulary == h.unique_operators + h.unique_operands, tag + ": n = n1 + n2");
    const double v = h.vocabulary >= 2 ? static_cast<double>(h.length) * std::log2(static_cast<double>(h.vocabulary)) : 0.0;
    f.expect(close_rel(h.volume, v, 1e-12), tag + ": V = N log2 n");
    f.expect(close_rel(h.effort, h.difficulty * h.volume, 1e-12), tag + ": E = D V");
  }
}

void complexity(Findings& f) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Script s = random_script(rng);
    f.expect(build_script_cfg(s).cyclomatic() == static_cast<long>(brute_force_counts(s).decisions) + 1,
             "random script " + std::to_string(i) + ": CC != decisions + 1");
  }
  const auto all = exhaustive_structures(4);
  for (const BlockSeq& body : all) {
    const Script s = script(flag(), body);
    f.expect(build_script_cfg(s).cyclomatic() == static_cast<long>(brute_force_counts(s).decisions) + 1,
             "exhaustive structure: CC != decisions + 1");
  }
  const auto cases = hand_icc_cases();
  f.expect(cases.size() >= 10, "fewer than 10 ICC fixtures");
  for (const IccCase& c : cases) {
    const long got = icc(c.project);
    f.expect(got == c.expected,
             "ICC " + c.name + ": got " + std::to_string(got) + ", expected " + std::to_string(c.expected));
  }
  Rng dup(99);
  for (int i = 0; i < 300; ++i) {
    Project p = random_project(dup, "d");
    p.stage.scripts.clear();
    Project d = p;
    for (const Sprite& s : p.sprites) {
      Sprite copy = s;
      copy.name += " copy";
      d.sprites.push_back(std::move(copy));
    }
    f.expect(wmc(d) == 2 * wmc(p), "WMC not additive under sprite duplication");
  }
}

void smells(Findings& f) {
  std::map<SmellKind, std::pair<int, int>> coverage;
  for (const auto& c : labeled_smell_corpus()) {
    f.expect(detector_fires(c) == c.positive, std::string(to_string(c.detector)) + ": case " + c.name + " disagrees");
    auto& [pos, neg] = coverage[c.detector];
    (c.positive ? pos : neg)++;
  }
  f.expect(coverage.size() == kSmellCount, "not every detector has labeled cases");
  for (const auto& [k, pn] : coverage) {
    f.expect(pn.first >= 3 && pn.second >= 3, std::string(to_string(k)) + ": fewer than 3 positive or negative cases");
  }

  Rng rng(17);
  GenOptions small;
  small.max_depth = 2;
  small.max_body = 6;
  for (int i = 0; i < 3000; ++i) {
    const Script a = random_script(rng, small);
    const Script b = mutate_script(rng, a);
    const CloneType t = classify_clone(a, b);
    f.expect(t == classify_clone(b, a), "clone relation not symmetric");
    if (count_blocks(a) < 6 || count_blocks(b) < 6) continue;
    const bool same_shape = blank_literals(a) == blank_literals(b);
    // Exactly one type holds: identical, same shape, or neither.
    f.expect((t == CloneType::Type1) == (a == b), "Type 1 iff identical");
    f.expect((t == CloneType::Type2) == (same_shape && !(a == b)), "Type 2 iff same shape but not identical");
    f.expect(t != CloneType::Type3 || !same_shape, "Type 3 overlaps Type 1 or 2");
  }
}

void lda(Findings& f) {
  std::mt19937_64 rng(77);
  for (int c = 0; c < 50; ++c) {
    const auto dtm = random_corpus(rng);
    LdaConfig cfg;
    cfg.k = 1 + static_cast<long>(rng() % 6);
    cfg.seed = rng();
    cfg.max_iterations = 15;
    const TopicModel m = fit_lda(dtm, cfg);
    for (std::size_t i = 1; i < m.elbo_history.size(); ++i) {
      f.expect(m.elbo_history[i] >= m.elbo_history[i - 1] - 1e-8,
               "corpus " + std::to_string(c) + ": ELBO dropped at iteration " + std::to_string(i));
    }
    f.expect(max_row_error(m.doc_topic) <= 1e-9, "doc-topic rows do not sum to 1");
    f.expect(max_row_error(m.topic_word) <= 1e-9, "topic-word rows do not sum to 1");
  }

  const auto toy = two_vocabulary_corpus();
  LdaConfig cfg;
  cfg.k = 2;
  const TopicModel m = fit_lda(toy, cfg);
  const std::size_t first = dominant_topic(m, 0).first;
  for (std::size_t d = 0; d < toy.documents(); ++d) {
    const auto [topic, p] = dominant_topic(m, d);
    f.expect(topic == (d < 10 ? first : 1 - first), "toy document " + std::to_string(d) + " in the wrong topic");
    f.expect(p > 0.9, "toy document " + std::to_string(d) + " has dominant probability " + std::to_string(p));
  }
  const TopicModel again = fit_lda(toy, cfg);
  f.expect(same_bytes(m.doc_topic.data, again.doc_topic.data) && same_bytes(m.topic_word.data, again.topic_word.data) &&
               same_bytes(m.elbo_history, again.elbo_history),
           "fixed seed is not byte-exact");
}

void tsne_checks(Findings& f) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    Matrix x(5, 3);
    for (double& v : x.data) v = g(rng);
    const Matrix p = joint_probabilities(x, 2.0);
    std::vector<double> y(10);
    for (double& v : y) v = g(rng);
    const KlGradient a = kl_gradient(p, y);
    const std::vector<double> fd = finite_difference_kl_gradient(p, y);
    double diff = 0.0, ref = 0.0;
    for (std::size_t c = 0; c < y.size(); ++c) {
      diff += (a.gradient[c] - fd[c]) * (a.gradient[c] - fd[c]);
      ref += fd[c] * fd[c];
    }
    const double rel = std::sqrt(diff / ref);
    f.expect(rel < 1e-4, "instance " + std::to_string(i) + ": gradient relative error " + std::to_string(rel));
  }
  EmbeddingConfig cfg;
  cfg.perplexity = 5.0;
  const Embedding2D a = tsne(two_blobs(), cfg);
  const double ratio = separation_ratio(a.coords);
  f.expect(ratio > 3.0, "two-blob separation ratio " + std::to_string(ratio));
  const Embedding2D b = tsne(two_blobs(), cfg);
  f.expect(a.coords.size() == b.coords.size() &&
               std::memcmp(a.coords.data(), b.coords.data(), a.coords.size() * sizeof(a.coords[0])) == 0,
           "layout is not byte-exact across runs");
}

void statistics(Findings& f) {
  std::size_t splits = 0;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<double> a, b;
      for (std::size_t i = 0; i < n; ++i) ((mask >> i) & 1u ? a : b).push_back(static_cast<double>(i + 1));
      const GroupComparison c = rank_sum_test(a, b);
      f.expect(c.method == TestMethod::Exact && close_rel(c.p, enumeration_rank_sum_p(a, b), 1e-12),
               "exact p differs from enumeration");
      ++splits;
    }
  }
  f.expect(splits == 494, "not every split was enumerated");

  const std::vector<double> lo{1, 2, 3}, hi{4, 5, 6};
  const double p = rank_sum_test(lo, hi).p;
  f.expect(std::abs(p - 0.1) < 1e-12, "[1,2,3] vs [4,5,6] gives p = " + std::to_string(p));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.1, 50.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(2 + rng() % 6), b(2 + rng() % 6);
    for (double& v : a) v = u(rng);
    for (double& v : b) v = u(rng);
    auto t = [](std::vector<double> v) {
      for (double& x : v) x = std::log(x) * 3.0 + x * x * x;
      return v;
    };
    const GroupComparison x = rank_sum_test(a, b);
    const GroupComparison y = rank_sum_test(t(a), t(b));
    f.expect(x.u == y.u && x.p == y.p, "pair " + std::to_string(i) + ": not invariant under a monotone transform");
  }

  const std::vector<double> hand{1, 2, 3, 4, 100};
  f.expect(filter_outliers_iqr(hand) == std::vector<double>{1, 2, 3, 4}, "[1,2,3,4,100] not filtered to [1,2,3,4]");
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> v(1 + rng() % 30);
    for (double& x : v) x = rng() % 10 == 0 ? g(rng) * 50.0 : g(rng);
    const auto once = filter_outliers_iqr(v);
    f.expect(filter_outliers_iqr(once) == once, "IQR filter not idempotent");
  }
}

void end_to_end(Findings& f) {
  const auto corpus = temp_dir("acceptance_corpus");
  write_synthetic_corpus(corpus);
  std::vector<std::map<std::string, std::string>> runs;
  for (unsigned jobs : {1u, 4u}) {
    const auto out = temp_dir("acceptance_out");
    RunConfig c;
    c.input = corpus;
    c.metadata = corpus / "metadata.csv";
    c.out = out;
    c.jobs = jobs;
    c.embed = true;
    c.lda.k = 2;
    c.lda.min_count = 3;
    c.embedding.perplexity = 5.0;
    std::ostringstream sink;
    f.expect(cmd_analyze(c, sink, sink) == kExitOk, "analyze failed");
    f.expect(cmd_topics(c, sink, sink) == kExitOk, "topics failed");
    f.expect(cmd_compare(c, sink, sink) == kExitOk, "compare failed");
    runs.push_back(snapshot(out));
    fs::remove_all(out);
  }
  fs::remove_all(corpus);
  f.expect(runs[0] == runs[1], "two runs are not byte-identical");
  if (!runs[0].count("metrics.csv")) {
    f.expect(false, "metrics.csv missing");
    return;
  }

  const CsvTable metrics = parse_csv(runs[0].at("metrics.csv"));
  f.expect(metrics.rows.size() == 20, "expected 20 projects");
  for (const char* m : {"conditional", "icc", "halstead_difficulty"}) {
    std::map<std::string, std::pair<double, int>> sums;
    for (const auto& row : metrics.rows) {
      auto& [s, n] = sums[row[metrics.column("group")]];
      s += std::stod(row[metrics.column(m)]);
      ++n;
    }
    const double game = sums["game"].first / std::max(1, sums["game"].second);
    const double story = sums["story"].first / std::max(1, sums["story"].second);
    std::ostringstream msg;
    msg << m << ": game mean " << game << " not above story mean " << story;
    f.expect(game > story, msg.str());
  }
}

struct Criterion {
  const char* name;
  std::function<void(Findings&)> check;
  double budget_seconds = 0.0;  // 0 = no limit
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"format fixtures parse to hand counts; sb2 and sb3 agree", format_fixtures, 5.0},
      {"metric counts match the brute-force oracle; Halstead identities", metric_oracles},
      {"CC = decisions + 1; hand ICC fixtures; WMC additivity", complexity},
      {"smell labels agree; clone types symmetric and disjoint", smells},
      {"LDA bound monotone, rows stochastic, toy corpus separates, deterministic", lda, 30.0},
      {"t-SNE gradient, two-blob separation, determinism", tsne_checks},
      {"rank-sum exact p, hand example, monotone invariance, IQR filter", statistics},
      {"synthetic corpus: game > story on conditional, ICC, difficulty; byte-identical reruns", end_to_end, 60.0},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const Criterion& c = criteria[i];
    Findings f;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.check(f);
    } catch (const std::exception& e) {
      f.expect(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0) {
      std::ostringstream msg;
      msg << "took " << seconds << " s, budget " << c.budget_seconds << " s";
      f.expect(seconds < c.budget_seconds, msg.str());
    }
    std::cout << (f.ok() ? "PASS" : "FAIL") << "  " << (i + 1) << "  " << c.name << "  (" << std::fixed
              << std::setprecision(2) << seconds << " s)\n";
    std::cout.unsetf(std::ios::fixed);
    for (const auto& m : f.messages()) std::cout << "        " << m << '\n';
    if (f.failures() > f.messages().size()) std::cout << "        ... " << f.failures() - f.messages().size() << " more\n";
    failed += f.ok() ? 0 : 1;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
