#include "blockscope/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/special_functions/digamma.hpp>

namespace blockscope {

namespace {

constexpr double kPhiEpsilon = 1e-100;

struct SparseDoc {
  std::vector<std::size_t> ids;
  std::vector<double> counts;
};

double digamma(double x) { return boost::math::digamma(x); }

// E[log theta] for one Dirichlet parameter vector.
void expected_log(std::span<const double> param, std::span<double> out) {
  const double total = digamma(std::accumulate(param.begin(), param.end(), 0.0));
  for (std::size_t k = 0; k < param.size(); ++k) out[k] = digamma(param[k]) - total;
}

Matrix expected_log_rows(const Matrix& m) {
  Matrix out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.rows; ++i) expected_log(m.row(i), out.row(i));
  return out;
}

struct Lda {
  std::size_t K;
  std::size_t V;
  double alpha;
  double beta;
  const LdaConfig& cfg;
  std::vector<SparseDoc> docs;
  std::vector<std::size_t> order;  // canonical accumulation order
  Matrix lambda;
  Matrix gamma;

  // Coordinate ascent on one document's gamma from its current value, then
  // the sufficient statistics for the final gamma.
  void e_step(std::size_t d, const Matrix& exp_elog_beta, Matrix& sstats) {
    const SparseDoc& doc = docs[d];
    std::span<double> g = gamma.row(d);
    std::vector<double> elog(K), exp_theta(K), norm(doc.ids.size()), next(K);
    auto refresh = [&] {
      expected_log(g, elog);
      for (std::size_t k = 0; k < K; ++k) exp_theta[k] = std::exp(elog[k]);
      for (std::size_t j = 0; j < doc.ids.size(); ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += exp_theta[k] * exp_elog_beta(k, doc.ids[j]);
        norm[j] = s + kPhiEpsilon;
      }
    };
    refresh();
    if (!doc.ids.empty()) {
      for (std::size_t it = 0; it < cfg.max_doc_iterations; ++it) {
        double change = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          double s = 0.0;
          for (std::size_t j = 0; j < doc.ids.size(); ++j) s += doc.counts[j] / norm[j] * exp_elog_beta(k, doc.ids[j]);
          next[k] = alpha + exp_theta[k] * s;
          change += std::abs(next[k] - g[k]);
        }
        std::copy(next.begin(), next.end(), g.begin());
        refresh();
        if (change / static_cast<double>(K) < cfg.doc_tolerance) break;
      }
    } else {
      std::fill(g.begin(), g.end(), alpha);
    }
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t j = 0; j < doc.ids.size(); ++j) sstats(k, doc.ids[j]) += exp_theta[k] * doc.counts[j] / norm[j];
    }
  }

  // Bound with the word-level variational parameters at their optimum for
  // the current gamma and lambda.
  double elbo() const {
    const Matrix elog_beta = expected_log_rows(lambda);
    double score = 0.0;
    std::vector<double> elog(K), tmp(K);
    for (std::size_t d : order) {
      std::span<const double> g = gamma.row(d);
      expected_log(g, elog);
      const SparseDoc& doc = docs[d];
      for (std::size_t j = 0; j < doc.ids.size(); ++j) {
        double mx = -INFINITY;
        for (std::size_t k = 0; k < K; ++k) {
          tmp[k] = elog[k] + elog_beta(k, doc.ids[j]);
          mx = std::max(mx, tmp[k]);
        }
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += std::exp(tmp[k] - mx);
        score += doc.counts[j] * (mx + std::log(s));
      }
      double gsum = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        score += (alpha - g[k]) * elog[k] + std::lgamma(g[k]) - std::lgamma(alpha);
        gsum += g[k];
      }
      score += std::lgamma(alpha * static_cast<double>(K)) - std::lgamma(gsum);
    }
    for (std::size_t k = 0; k < K; ++k) {
      double lsum = 0.0;
      for (std::size_t w = 0; w < V; ++w) {
        const double l = lambda(k, w);
        score += (beta - l) * elog_beta(k, w) + std::lgamma(l) - std::lgamma(beta);
        lsum += l;
      }
      score += std::lgamma(beta * static_cast<double>(V)) - std::lgamma(lsum);
    }
    return score;
  }

  double iterate() {
    Matrix exp_elog_beta = expected_log_rows(lambda);
    for (double& x : exp_elog_beta.data) x = std::exp(x);
    Matrix sstats(K, V);
    for (std::size_t d : order) e_step(d, exp_elog_beta, sstats);
    for (std::size_t i = 0; i < lambda.data.size(); ++i) {
      lambda.data[i] = beta + sstats.data[i] * exp_elog_beta.data[i];
    }
    return elbo();
  }
};

}  // namespace

TopicModel fit_lda(const DocumentTermMatrix& dtm, const LdaConfig& config) {
  if (config.k < 1) throw InvalidK(config.k);
  if (dtm.vocabulary.empty()) throw EmptyVocabulary(0);
  const std::size_t K = static_cast<std::size_t>(config.k);
  const std::size_t V = dtm.terms();
  const std::size_t D = dtm.documents();

  Lda lda{K, V, config.alpha.value_or(1.0 / static_cast<double>(K)), config.beta.value_or(1.0 / static_cast<double>(K)),
          config, {}, {}, Matrix(K, V), Matrix(D, K, 1.0)};
  if (lda.alpha <= 0.0 || lda.beta <= 0.0) throw std::invalid_argument("LDA priors must be positive");

  for (const auto& row : dtm.counts) {
    SparseDoc doc;
    for (std::size_t w = 0; w < row.size(); ++w) {
      if (row[w] > 0) {
        doc.ids.push_back(w);
        doc.counts.push_back(static_cast<double>(row[w]));
      }
    }
    lda.docs.push_back(std::move(doc));
  }
  // Accumulating in content order makes results independent of document order.
  lda.order.resize(D);
  std::iota(lda.order.begin(), lda.order.end(), 0);
  std::stable_sort(lda.order.begin(), lda.order.end(),
                   [&](std::size_t a, std::size_t b) { return dtm.counts[a] < dtm.counts[b]; });

  std::mt19937_64 rng(config.seed);
  std::gamma_distribution<double> init(100.0, 0.01);
  for (double& x : lda.lambda.data) x = init(rng);

  TopicModel model;
  model.k = K;
  model.vocabulary = dtm.vocabulary;
  model.document_ids = dtm.document_ids;
  model.alpha = lda.alpha;
  model.beta = lda.beta;
  model.seed = config.seed;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    model.elbo_history.push_back(lda.iterate());
    ++model.iterations;
  }

  model.topic_word = lda.lambda;
  for (std::size_t k = 0; k < K; ++k) {
    auto r = model.topic_word.row(k);
    const double s = std::accumulate(r.begin(), r.end(), 0.0);
    for (double& x : r) x /= s;
  }
  model.doc_topic = Matrix(D, K);
  for (std::size_t d = 0; d < D; ++d) {
    auto g = lda.gamma.row(d);
    const double s = std::accumulate(g.begin(), g.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) model.doc_topic(d, k) = g[k] / s;
    model.empty_document.push_back(lda.docs[d].ids.empty());
  }
  return model;
}

std::pair<std::size_t, double> dominant_topic(std::span<const double> row) {
  if (row.empty()) throw std::invalid_argument("dominant_topic: empty row");
  std::size_t best = 0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (row[k] > row[best]) best = k;
  }
  return {best, row[best]};
}

std::pair<std::size_t, double> dominant_topic(const TopicModel& model, std::size_t document) {
  if (document >= model.doc_topic.rows) throw std::out_of_range("dominant_topic: document index");
  return dominant_topic(model.doc_topic.row(document));
}

std::vector<std::pair<std::string, double>> top_terms(const TopicModel& model, std::size_t topic, std::size_t n) {
  if (topic >= model.k) throw std::out_of_range("top_terms: topic index");
  std::vector<std::size_t> idx(model.vocabulary.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto w = model.topic_word.row(topic);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return w[a] != w[b] ? w[a] > w[b] : model.vocabulary[a] < model.vocabulary[b];
  });
  if (idx.size() > n) idx.resize(n);
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i : idx) out.emplace_back(model.vocabulary[i], w[i]);
  return out;
}

}  // namespace blockscope
