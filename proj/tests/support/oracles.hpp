#pragma once

// Brute-force reference implementations the library is checked against.
// They share no code with the library beyond the AST types.

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "blockscope/matrix.hpp"
#include "blockscope/model.hpp"
#include "blockscope/metrics.hpp"

namespace testsupport {

struct CountOracle {
  std::size_t blocks = 0;
  std::array<std::size_t, blockscope::kCategoryCount> categories{};
  // conditional, coordination, iteration, variables
  std::array<std::size_t, 4> concepts{};
  std::size_t decisions = 0;
  std::map<std::string, std::size_t> opcodes;
};

// Category from the opcode prefix alone.
std::size_t oracle_category_index(const std::string& opcode);

CountOracle brute_force_counts(const blockscope::Project& project);
CountOracle brute_force_counts(const blockscope::Script& script);

// Halstead counts with operators = blocks and operands = literal and menu
// values; the derived fields are left at zero.
blockscope::HalsteadMetrics halstead_oracle(const blockscope::Project& project);

// Two-sided exact rank-sum p by enumerating label assignments and computing
// U from pairwise comparisons. Intended for tie-free samples.
double enumeration_rank_sum_p(std::span<const double> a, std::span<const double> b);

// KL(P || Q) evaluated directly from its definition.
double direct_kl(const blockscope::Matrix& p, std::span<const double> y);

// Central finite-difference gradient of direct_kl.
std::vector<double> finite_difference_kl_gradient(const blockscope::Matrix& p, std::span<const double> y, double h = 1e-5);

}  // namespace testsupport
