#include "blockscope/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace blockscope {

void EmbeddingConfig::validate() const {
  if (!(perplexity >= 1.0)) throw std::invalid_argument("perplexity must be >= 1");
  if (iterations < 1) throw std::invalid_argument("t-SNE iterations must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (report_every < 1) throw std::invalid_argument("report_every must be >= 1");
}

SigmaCalibration calibrate_sigma(std::span<const double> d, double perplexity) {
  if (d.empty()) throw std::invalid_argument("calibrate_sigma: need at least one neighbour");
  if (!(perplexity >= 1.0)) throw std::invalid_argument("calibrate_sigma: perplexity must be >= 1");
  SigmaCalibration out;
  const std::size_t m = d.size();
  const double dmin = *std::min_element(d.begin(), d.end());
  const double dmax = *std::max_element(d.begin(), d.end());
  out.conditionals.assign(m, 1.0 / static_cast<double>(m));
  if (dmax - dmin <= 0.0) {
    out.degenerate = true;
    out.entropy_bits = std::log2(static_cast<double>(m));
    out.beta = 0.0;
    out.sigma = std::numeric_limits<double>::infinity();
    return out;
  }

  const double target = std::log2(perplexity);
  double beta = 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  auto evaluate = [&](double b) {
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out.conditionals[j] = std::exp(-b * (d[j] - dmin));
      z += out.conditionals[j];
    }
    double h = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      out.conditionals[j] /= z;
      if (out.conditionals[j] > 0.0) h -= out.conditionals[j] * std::log2(out.conditionals[j]);
    }
    return h;
  };
  double h = evaluate(beta);
  for (out.steps = 1; out.steps < 50 && std::abs(h - target) > 1e-5; ++out.steps) {
    // Entropy falls as the precision grows.
    if (h > target) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
    } else {
      hi = beta;
      beta = (beta + lo) / 2.0;
    }
    h = evaluate(beta);
  }
  out.beta = beta;
  out.sigma = std::sqrt(1.0 / (2.0 * beta));
  out.entropy_bits = h;
  return out;
}

namespace {

void check_finite(const Matrix& m) {
  for (double x : m.data) {
    if (!std::isfinite(x)) throw NonFiniteInput();
  }
}

}  // namespace

Matrix joint_probabilities(const Matrix& x, double perplexity) {
  check_finite(x);
  const std::size_t n = x.rows;
  if (n < 2) throw std::invalid_argument("t-SNE needs at least two points");
  Matrix dist(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols; ++c) {
        const double diff = x(i, c) - x(j, c);
        s += diff * diff;
      }
      dist(i, j) = dist(j, i) = s;
    }
  }
  Matrix cond(n, n);
  std::vector<double> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) row[k++] = dist(i, j);
    }
    const SigmaCalibration cal = calibrate_sigma(row, perplexity);
    for (std::size_t j = 0, k = 0; j < n; ++j) {
      if (j != i) cond(i, j) = cal.conditionals[k++];
    }
  }
  Matrix p(n, n);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) p(i, j) = (cond(i, j) + cond(j, i)) / denom;
    }
  }
  return p;
}

KlGradient kl_gradient(const Matrix& p, std::span<const double> y, double exaggeration) {
  const std::size_t n = p.rows;
  if (y.size() != 2 * n) throw std::invalid_argument("kl_gradient: layout size mismatch");
  Matrix num(n, n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y[2 * i] - y[2 * j];
      const double dy = y[2 * i + 1] - y[2 * j + 1];
      const double v = 1.0 / (1.0 + dx * dx + dy * dy);
      num(i, j) = num(j, i) = v;
      z += 2.0 * v;
    }
  }
  KlGradient out;
  out.gradient.assign(2 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double q = num(i, j) / z;
      const double pij = p(i, j);
      if (pij > 0.0) out.kl += pij * std::log(pij / q);
      const double f = 4.0 * (exaggeration * pij - q) * num(i, j);
      out.gradient[2 * i] += f * (y[2 * i] - y[2 * j]);
      out.gradient[2 * i + 1] += f * (y[2 * i + 1] - y[2 * j + 1]);
    }
  }
  return out;
}

Embedding2D tsne(const Matrix& points, const EmbeddingConfig& config) {
  config.validate();
  check_finite(points);
  const std::size_t n = points.rows;
  if (n < 2 || points.cols < 1) throw std::invalid_argument("t-SNE needs at least two points of dimension >= 1");

  Embedding2D out;
  if (config.perplexity >= static_cast<double>(n - 1) / 3.0) {
    out.warnings.push_back("perplexity " + std::to_string(config.perplexity) + " is large for " + std::to_string(n) +
                           " points; affinities will be nearly uniform");
  }
  const Matrix p = joint_probabilities(points, config.perplexity);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1e-4);
  std::vector<double> y(2 * n);
  for (double& v : y) v = normal(rng);
  std::vector<double> update(2 * n, 0.0);
  std::vector<double> gains(2 * n, 1.0);

  auto recentre = [&] {
    double cx = 0.0, cy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cx += y[2 * i];
      cy += y[2 * i + 1];
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[2 * i] -= cx;
      y[2 * i + 1] -= cy;
    }
  };
  recentre();

  for (std::size_t it = 0; it < config.iterations; ++it) {
    const bool exaggerate = it < config.exaggeration_iterations;
    const double momentum = it < config.momentum_switch ? config.initial_momentum : config.final_momentum;
    KlGradient g = kl_gradient(p, y, exaggerate ? config.early_exaggeration : 1.0);
    for (std::size_t c = 0; c < 2 * n; ++c) {
      if (update[c] * g.gradient[c] < 0.0) {
        gains[c] += 0.2;
      } else {
        gains[c] *= 0.8;
      }
      gains[c] = std::max(gains[c], 0.01);
      update[c] = momentum * update[c] - config.learning_rate * gains[c] * g.gradient[c];
      y[c] += update[c];
    }
    recentre();
    const std::size_t done = it + 1;
    if (done % config.report_every == 0 || done == config.iterations) {
      out.kl_history.emplace_back(done, kl_gradient(p, y).kl);
    }
  }

  for (double v : y) {
    if (!std::isfinite(v)) throw std::runtime_error("t-SNE diverged");
  }
  out.coords.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.coords[i] = {y[2 * i], y[2 * i + 1]};
  return out;
}

}  // namespace blockscope
