#pragma once

// Latent Dirichlet Allocation fitted by batch variational Bayes.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blockscope/matrix.hpp"
#include "blockscope/text.hpp"

namespace blockscope {

class InvalidK : public std::invalid_argument {
 public:
  explicit InvalidK(long k) : std::invalid_argument("topic count K must be >= 1, got " + std::to_string(k)) {}
};

struct LdaConfig {
  long k = 10;
  std::uint64_t seed = 100;
  std::size_t max_iterations = 10;
  std::optional<double> alpha;  // default 1/K
  std::optional<double> beta;   // default 1/K
  std::size_t max_doc_iterations = 100;
  double doc_tolerance = 1e-3;  // mean absolute change of a document's gamma
};

struct TopicModel {
  std::size_t k = 0;
  std::vector<std::string> vocabulary;
  std::vector<std::string> document_ids;
  Matrix topic_word;  // K x V, rows sum to 1
  Matrix doc_topic;   // D x K, rows sum to 1
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  // Evidence lower bound after each iteration.
  std::vector<double> elbo_history;
  // Documents without any vocabulary term (their row is the prior mean).
  std::vector<bool> empty_document;
};

TopicModel fit_lda(const DocumentTermMatrix& dtm, const LdaConfig& config = {});

// Argmax of the row; ties go to the lowest topic id.
std::pair<std::size_t, double> dominant_topic(std::span<const double> row);
std::pair<std::size_t, double> dominant_topic(const TopicModel& model, std::size_t document);

// Highest-weight terms of a topic, descending; equal weights in term order.
std::vector<std::pair<std::string, double>> top_terms(const TopicModel& model, std::size_t topic, std::size_t n = 10);

}  // namespace blockscope
