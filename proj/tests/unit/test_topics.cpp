#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blockscope/lda.hpp"
#include "blockscope/text.hpp"
#include "builders.hpp"
#include "corpora.hpp"

using namespace blockscope;
using namespace testsupport;

namespace {

using Words = std::vector<std::string>;

double max_row_error(const Matrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    auto r = m.row(i);
    worst = std::max(worst, std::abs(std::accumulate(r.begin(), r.end(), 0.0) - 1.0));
  }
  return worst;
}

}  // namespace

TEST_SUITE("text") {
  TEST_CASE("splitting lowercases and breaks on punctuation") {
    CHECK(split_words("Hello, World!") == Words{"hello", "world"});
    CHECK(split_words("  game_over  ") == Words{"game", "over"});
    CHECK(split_words("GRÖSSE Äpfel straße") == Words{"grösse", "äpfel", "straße"});
    CHECK(split_words("left\u2014right\u201cquoted\u201d") == Words{"left", "right", "quoted"});
    CHECK(split_words("ΑΛΦΑ Привет") == Words{"αλφα", "привет"});
    CHECK(split_words("").empty());
    for (const auto& w : split_words("a b\tc\nd  e")) CHECK(w.find_first_of(" \t\n") == std::string::npos);
  }

  TEST_CASE("UTF-8 helpers") {
    CHECK(utf8_lower("ÜBER Ĳ") == "über ĳ");
    CHECK(utf8_length("über") == 4);
    CHECK(utf8_length("") == 0);
  }

  TEST_CASE("stopword lists") {
    const auto sw = StopwordConfig::defaults();
    CHECK(sw.english.size() > 300);
    CHECK(sw.german.size() > 200);
    CHECK(sw.custom.size() == 8);
    for (const char* w : {"the", "and", "und", "der", "stage", "kostüm", "plopp"}) CHECK(sw.contains(w));
    CHECK_FALSE(sw.contains("dragon"));
    CHECK(parse_word_list("# comment\nFoo\n\n  bar  \n") == std::set<std::string, std::less<>>{"foo", "bar"});
  }

  TEST_CASE("preprocessing drops stopwords, digits and single characters") {
    const TokenDocument raw{"p", {"The", "Dragon", "123", "x", "und", "Kostüm", "castle", "ä", "4ever"}};
    const TokenDocument out = preprocess(raw, StopwordConfig::defaults());
    CHECK(out.project_id == "p");
    CHECK(out.tokens == Words{"dragon", "castle", "4ever"});
  }

  TEST_CASE("token extraction covers names, assets, literals and messages") {
    Sprite s = sprite("Space Ship", {script(flag(), {say("Welcome home"), broadcast("Level Up")})}, {"rocket"});
    s.sounds.push_back({"laser"});
    s.variables.push_back({"fuel", "0"});
    s.lists.push_back({"stars"});
    Project p = project({s}, {script(receive("level up"), {B("looks_switchbackdropto").menu("BACKDROP", "moon")})});
    const TokenDocument d = extract_tokens(p);
    for (const char* w : {"space", "ship", "rocket", "laser", "fuel", "stars", "welcome", "home", "level", "up",
                          "backdrop1"}) {
      CAPTURE(w);
      CHECK(std::count(d.tokens.begin(), d.tokens.end(), std::string(w)) >= 1);
    }
    // The stage name and ordinary menu choices are not text.
    CHECK(std::count(d.tokens.begin(), d.tokens.end(), std::string("moon")) == 0);
    CHECK(std::count(d.tokens.begin(), d.tokens.end(), std::string("level")) == 2);
  }

  TEST_CASE("document-term matrix") {
    std::vector<TokenDocument> docs{{"a", {"cat", "cat", "dog"}}, {"b", {"dog", "fish"}}, {"c", {}}};
    const auto dtm = build_dtm(docs, 2);
    CHECK(dtm.vocabulary == Words{"cat", "dog"});
    CHECK(dtm.document_ids == Words{"a", "b", "c"});
    CHECK(dtm.counts[0] == std::vector<std::uint32_t>{2, 1});
    CHECK(dtm.counts[1] == std::vector<std::uint32_t>{0, 1});
    CHECK(dtm.row_total(2) == 0);
    CHECK_THROWS_AS(build_dtm(docs, 5), EmptyVocabulary);
    CHECK_THROWS_AS(build_dtm(std::vector<TokenDocument>{}, 1), std::invalid_argument);
  }
}

TEST_SUITE("lda") {
  TEST_CASE("ELBO never decreases on random corpora") {
    std::mt19937_64 rng(77);
    for (int c = 0; c < 50; ++c) {
      const auto dtm = random_corpus(rng);
      LdaConfig cfg;
      cfg.k = 1 + static_cast<long>(rng() % 6);
      cfg.seed = rng();
      cfg.max_iterations = 15;
      const TopicModel m = fit_lda(dtm, cfg);
      REQUIRE(m.elbo_history.size() == 15);
      for (std::size_t i = 1; i < m.elbo_history.size(); ++i) {
        CAPTURE(c);
        CAPTURE(i);
        CHECK(m.elbo_history[i] >= m.elbo_history[i - 1] - 1e-8);
      }
      CHECK(max_row_error(m.doc_topic) <= 1e-9);
      CHECK(max_row_error(m.topic_word) <= 1e-9);
    }
  }

  TEST_CASE("rows are stochastic after every iteration") {
    const auto dtm = two_vocabulary_corpus();
    for (std::size_t it = 1; it <= 10; ++it) {
      LdaConfig cfg;
      cfg.k = 3;
      cfg.max_iterations = it;
      const TopicModel m = fit_lda(dtm, cfg);
      CHECK(max_row_error(m.doc_topic) <= 1e-9);
      CHECK(max_row_error(m.topic_word) <= 1e-9);
    }
  }

  TEST_CASE("two disjoint vocabularies separate") {
    const auto dtm = two_vocabulary_corpus();
    LdaConfig cfg;
    cfg.k = 2;
    const TopicModel m = fit_lda(dtm, cfg);
    const std::size_t first = dominant_topic(m, 0).first;
    for (std::size_t d = 0; d < 20; ++d) {
      const auto [topic, p] = dominant_topic(m, d);
      CAPTURE(d);
      CHECK(topic == (d < 10 ? first : 1 - first));
      CHECK(p > 0.9);
    }
  }

  TEST_CASE("fixed seed is bit-for-bit deterministic") {
    std::mt19937_64 rng(5);
    const auto dtm = random_corpus(rng);
    LdaConfig cfg;
    cfg.k = 4;
    cfg.seed = 1234;
    const TopicModel a = fit_lda(dtm, cfg);
    const TopicModel b = fit_lda(dtm, cfg);
    CHECK(a.doc_topic == b.doc_topic);
    CHECK(a.topic_word == b.topic_word);
    CHECK(a.elbo_history == b.elbo_history);
    cfg.seed = 1235;
    CHECK_FALSE(fit_lda(dtm, cfg).topic_word == a.topic_word);
  }

  TEST_CASE("document order does not matter") {
    std::mt19937_64 rng(9);
    for (int c = 0; c < 10; ++c) {
      const auto dtm = random_corpus(rng);
      std::vector<std::size_t> perm(dtm.documents());
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      DocumentTermMatrix shuffled = dtm;
      for (std::size_t i = 0; i < perm.size(); ++i) {
        shuffled.counts[i] = dtm.counts[perm[i]];
        shuffled.document_ids[i] = dtm.document_ids[perm[i]];
      }
      LdaConfig cfg;
      cfg.k = 3;
      const TopicModel a = fit_lda(dtm, cfg);
      const TopicModel b = fit_lda(shuffled, cfg);
      CHECK(a.topic_word == b.topic_word);
      for (std::size_t i = 0; i < perm.size(); ++i) {
        const auto ra = a.doc_topic.row(perm[i]);
        const auto rb = b.doc_topic.row(i);
        CHECK(std::equal(ra.begin(), ra.end(), rb.begin()));
      }
    }
  }

  TEST_CASE("K = 1 puts every document in the single topic") {
    const auto dtm = two_vocabulary_corpus();
    LdaConfig cfg;
    cfg.k = 1;
    const TopicModel m = fit_lda(dtm, cfg);
    for (double v : m.doc_topic.data) CHECK(v == doctest::Approx(1.0));
    cfg.k = 0;
    CHECK_THROWS_AS(fit_lda(dtm, cfg), InvalidK);
  }

  TEST_CASE("empty documents get the prior mean") {
    DocumentTermMatrix dtm;
    dtm.vocabulary = {"x", "y"};
    dtm.document_ids = {"full", "empty"};
    dtm.counts = {{3, 1}, {0, 0}};
    LdaConfig cfg;
    cfg.k = 4;
    const TopicModel m = fit_lda(dtm, cfg);
    CHECK(m.empty_document == std::vector<bool>{false, true});
    for (std::size_t k = 0; k < 4; ++k) CHECK(m.doc_topic(1, k) == doctest::Approx(0.25));
    CHECK(m.alpha == doctest::Approx(0.25));
    CHECK(m.beta == doctest::Approx(0.25));
  }

  TEST_CASE("dominant topic: lowest id wins ties and scaling does not matter") {
    const std::vector<double> row{0.2, 0.4, 0.4};
    CHECK(dominant_topic(row).first == 1);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      std::vector<double> r(5), scaled(5);
      const double s = 0.01 + 100.0 * u(rng);
      for (std::size_t k = 0; k < 5; ++k) {
        r[k] = u(rng);
        scaled[k] = r[k] * s;
      }
      CHECK(dominant_topic(r).first == dominant_topic(scaled).first);
    }
  }

  TEST_CASE("top terms are sorted by weight then term") {
    TopicModel m;
    m.k = 1;
    m.vocabulary = {"b", "a", "c", "d"};
    m.topic_word = Matrix(1, 4);
    m.topic_word.data = {0.3, 0.3, 0.1, 0.3};
    const auto top = top_terms(m, 0, 3);
    REQUIRE(top.size() == 3);
    CHECK(top[0].first == "a");
    CHECK(top[1].first == "b");
    CHECK(top[2].first == "d");
    CHECK(top_terms(m, 0, 10).size() == 4);
    CHECK_THROWS(top_terms(m, 1));
  }
}
