#pragma once

// Per-project code metrics: size, block histograms, programming concepts,
// Halstead measures and cyclomatic complexity (per script and interprocedural).

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blockscope/model.hpp"

namespace blockscope {

enum class Concept { Conditional, Coordination, Iteration, Variables };

inline constexpr std::size_t kConceptCount = 4;
inline constexpr std::array<Concept, kConceptCount> kAllConcepts = {Concept::Conditional, Concept::Coordination,
                                                                    Concept::Iteration, Concept::Variables};

std::string_view to_string(Concept c);

// Classification of blocks into programming concepts:
//   Conditional  if, if on edge bounce, if-else
//   Coordination broadcast, when I receive, broadcast and wait, wait, wait until
//   Iteration    repeat, repeat until, forever
//   Variables    change/set variable, variable reporter, show/hide variable
std::optional<Concept> concept_of(std::string_view opcode);

using CategoryCounts = std::array<std::size_t, kCategoryCount>;
using ConceptCounts = std::array<std::size_t, kConceptCount>;

struct HalsteadMetrics {
  std::size_t total_operators = 0;   // N1
  std::size_t total_operands = 0;    // N2
  std::size_t unique_operators = 0;  // n1
  std::size_t unique_operands = 0;   // n2
  std::size_t length = 0;            // N = N1 + N2
  std::size_t vocabulary = 0;        // n = n1 + n2
  double volume = 0.0;               // N * log2(n), bits
  double difficulty = 0.0;           // (n1 / 2) * (N2 / max(n2, 1))
  double effort = 0.0;               // D * V

  static HalsteadMetrics from_counts(std::size_t N1, std::size_t N2, std::size_t n1, std::size_t n2);
  friend bool operator==(const HalsteadMetrics&, const HalsteadMetrics&) = default;
};

struct MetricRecord {
  std::string project_id;
  std::size_t block_count = 0;
  CategoryCounts category_counts{};
  std::map<std::string, std::size_t> opcode_counts;
  std::size_t distinct_opcodes = 0;
  ConceptCounts concept_counts{};
  HalsteadMetrics halstead;
  long wmc = 0;
  long icc = 0;
};

// Every block: hats, bodies, substacks, nested reporters and orphan stacks.
std::size_t count_blocks(const Project& project);

CategoryCounts category_histogram(const Project& project);

struct CategorySummary {
  CategoryCounts totals{};
  std::array<double, kCategoryCount> mean_per_project{};
  std::size_t projects = 0;
};
CategorySummary category_histogram(std::span<const Project* const> projects);
CategorySummary category_histogram(std::span<const MetricRecord* const> records);

std::map<std::string, std::size_t> opcode_histogram(const Project& project);

struct RankedOpcode {
  Category category = Category::Custom;
  std::string opcode;
  std::size_t count = 0;
  friend bool operator==(const RankedOpcode&, const RankedOpcode&) = default;
};

// Descending by count, ties by opcode. top_k must be >= 1.
std::vector<RankedOpcode> rank_opcodes(std::span<const std::map<std::string, std::size_t>* const> histograms,
                                       std::size_t top_k);
std::vector<RankedOpcode> rank_opcodes(std::span<const Project* const> projects, std::size_t top_k);

ConceptCounts classify_concepts(const Project& project);

// Operators are block opcodes; operands are literal inputs and menu
// selections (variable, list, message, costume, sound and sprite names).
HalsteadMetrics halstead(const Project& project);

// Sum of per-script cyclomatic complexity.
long wmc(const Project& project);
// E - N + 2P on the interprocedural graph; 0 for a project without scripts.
long icc(const Project& project);

MetricRecord compute_metrics(const Project& project);

}  // namespace blockscope
