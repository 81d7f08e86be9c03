#pragma once

// Exact (O(n^2)) t-SNE into two dimensions.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blockscope/matrix.hpp"

namespace blockscope {

class NonFiniteInput : public std::invalid_argument {
 public:
  NonFiniteInput() : std::invalid_argument("t-SNE input contains NaN or infinity") {}
};

struct EmbeddingConfig {
  double perplexity = 15.0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  std::uint64_t seed = 100;
  std::size_t report_every = 50;

  void validate() const;
};

struct SigmaCalibration {
  double beta = 1.0;   // precision 1 / (2 sigma^2)
  double sigma = 0.0;
  std::vector<double> conditionals;
  double entropy_bits = 0.0;
  std::size_t steps = 0;
  bool degenerate = false;  // all distances equal; conditionals are uniform
};

// `squared_distances` are to the other points (self excluded). Bisection on
// the precision until 2^H matches the perplexity within 1e-5 (at most 50 steps).
SigmaCalibration calibrate_sigma(std::span<const double> squared_distances, double perplexity);

// Symmetrized joint affinities (p_j|i + p_i|j) / 2n from an n x d matrix.
Matrix joint_probabilities(const Matrix& points, double perplexity);

struct KlGradient {
  double kl = 0.0;
  std::vector<double> gradient;  // n x 2, row-major
};

// KL(P || Q) for the layout `y` (n x 2, row-major) and its analytic gradient.
// P is multiplied by `exaggeration` in the gradient only.
KlGradient kl_gradient(const Matrix& p, std::span<const double> y, double exaggeration = 1.0);

struct Embedding2D {
  std::vector<std::array<double, 2>> coords;
  std::vector<std::pair<std::size_t, double>> kl_history;  // (iteration, KL)
  std::vector<std::string> warnings;
};

Embedding2D tsne(const Matrix& points, const EmbeddingConfig& config = {});

}  // namespace blockscope
