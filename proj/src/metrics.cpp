#include "blockscope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "blockscope/cfg.hpp"
#include "blockscope/opcode_table.hpp"

namespace blockscope {

std::string_view to_string(Concept c) {
  switch (c) {
    case Concept::Conditional: return "conditional";
    case Concept::Coordination: return "coordination";
    case Concept::Iteration: return "iteration";
    case Concept::Variables: return "variables";
  }
  return "conditional";
}

std::optional<Concept> concept_of(std::string_view op) {
  if (op == "control_if" || op == "motion_ifonedgebounce" || op == "control_if_else") return Concept::Conditional;
  if (op == "event_broadcast" || op == "event_whenbroadcastreceived" || op == "event_broadcastandwait" ||
      op == "control_wait" || op == "control_wait_until") {
    return Concept::Coordination;
  }
  if (op == "control_repeat" || op == "control_repeat_until" || op == "control_forever") return Concept::Iteration;
  if (op == "data_changevariableby" || op == "data_setvariableto" || op == "data_variable" ||
      op == "data_showvariable" || op == "data_hidevariable") {
    return Concept::Variables;
  }
  return std::nullopt;
}

HalsteadMetrics HalsteadMetrics::from_counts(std::size_t N1, std::size_t N2, std::size_t n1, std::size_t n2) {
  HalsteadMetrics h;
  h.total_operators = N1;
  h.total_operands = N2;
  h.unique_operators = n1;
  h.unique_operands = n2;
  h.length = N1 + N2;
  h.vocabulary = n1 + n2;
  h.volume = h.vocabulary > 1 ? static_cast<double>(h.length) * std::log2(static_cast<double>(h.vocabulary)) : 0.0;
  h.difficulty = (static_cast<double>(n1) / 2.0) * (static_cast<double>(N2) / static_cast<double>(std::max<std::size_t>(n2, 1)));
  h.effort = h.difficulty * h.volume;
  return h;
}

std::size_t count_blocks(const Project& project) {
  std::size_t n = 0;
  for (const Sprite* s : targets(project)) n += count_blocks(*s);
  return n;
}

CategoryCounts category_histogram(const Project& project) {
  CategoryCounts counts{};
  for_each_block(project, [&](const Block& b, const BlockSite&) { ++counts[static_cast<std::size_t>(b.category)]; });
  return counts;
}

CategorySummary category_histogram(std::span<const Project* const> projects) {
  CategorySummary s;
  s.projects = projects.size();
  for (const Project* p : projects) {
    auto c = category_histogram(*p);
    for (std::size_t i = 0; i < kCategoryCount; ++i) s.totals[i] += c[i];
  }
  for (std::size_t i = 0; i < kCategoryCount && s.projects > 0; ++i) {
    s.mean_per_project[i] = static_cast<double>(s.totals[i]) / static_cast<double>(s.projects);
  }
  return s;
}

CategorySummary category_histogram(std::span<const MetricRecord* const> records) {
  CategorySummary s;
  s.projects = records.size();
  for (const MetricRecord* r : records) {
    for (std::size_t i = 0; i < kCategoryCount; ++i) s.totals[i] += r->category_counts[i];
  }
  for (std::size_t i = 0; i < kCategoryCount && s.projects > 0; ++i) {
    s.mean_per_project[i] = static_cast<double>(s.totals[i]) / static_cast<double>(s.projects);
  }
  return s;
}

std::map<std::string, std::size_t> opcode_histogram(const Project& project) {
  std::map<std::string, std::size_t> counts;
  for_each_block(project, [&](const Block& b, const BlockSite&) { ++counts[b.opcode]; });
  return counts;
}

std::vector<RankedOpcode> rank_opcodes(std::span<const std::map<std::string, std::size_t>* const> histograms,
                                       std::size_t top_k) {
  if (top_k < 1) throw std::invalid_argument("rank_opcodes: top_k must be >= 1");
  std::map<std::string, std::size_t> total;
  for (const auto* h : histograms) {
    for (const auto& [op, n] : *h) total[op] += n;
  }
  std::vector<RankedOpcode> ranked;
  ranked.reserve(total.size());
  for (const auto& [op, n] : total) ranked.push_back(RankedOpcode{block_category(op), op, n});
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedOpcode& a, const RankedOpcode& b) {
    return a.count != b.count ? a.count > b.count : a.opcode < b.opcode;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  return ranked;
}

std::vector<RankedOpcode> rank_opcodes(std::span<const Project* const> projects, std::size_t top_k) {
  std::vector<std::map<std::string, std::size_t>> hist;
  hist.reserve(projects.size());
  for (const Project* p : projects) hist.push_back(opcode_histogram(*p));
  std::vector<const std::map<std::string, std::size_t>*> ptrs;
  for (const auto& h : hist) ptrs.push_back(&h);
  return rank_opcodes(ptrs, top_k);
}

ConceptCounts classify_concepts(const Project& project) {
  ConceptCounts counts{};
  for_each_block(project, [&](const Block& b, const BlockSite&) {
    if (auto c = concept_of(b.opcode)) ++counts[static_cast<std::size_t>(*c)];
  });
  return counts;
}

HalsteadMetrics halstead(const Project& project) {
  std::size_t N1 = 0;
  std::size_t N2 = 0;
  std::set<std::string> operators;
  std::set<std::string> operands;
  for_each_block(project, [&](const Block& b, const BlockSite&) {
    ++N1;
    operators.insert(b.opcode);
    for (const Input& in : b.inputs) {
      if (const auto* lit = std::get_if<Literal>(&in.value)) {
        ++N2;
        operands.insert(lit->text);
      } else if (const auto* menu = std::get_if<MenuSelection>(&in.value)) {
        ++N2;
        operands.insert(menu->value);
      }
    }
  });
  return HalsteadMetrics::from_counts(N1, N2, operators.size(), operands.size());
}

long wmc(const Project& project) {
  long total = 0;
  for (const Sprite* s : targets(project)) {
    for (const Script& script : s->scripts) total += build_script_cfg(script).cyclomatic();
  }
  return total;
}

long icc(const Project& project) {
  const bool has_scripts = std::any_of(project.sprites.begin(), project.sprites.end(),
                                       [](const Sprite& s) { return !s.scripts.empty(); }) ||
                           !project.stage.scripts.empty();
  if (!has_scripts) return 0;
  return interprocedural_cyclomatic(build_interprocedural_cfg(project));
}

MetricRecord compute_metrics(const Project& project) {
  MetricRecord r;
  r.project_id = project.id;
  r.block_count = count_blocks(project);
  r.category_counts = category_histogram(project);
  r.opcode_counts = opcode_histogram(project);
  r.distinct_opcodes = r.opcode_counts.size();
  r.concept_counts = classify_concepts(project);
  r.halstead = halstead(project);
  r.wmc = wmc(project);
  r.icc = icc(project);
  return r;
}

}  // namespace blockscope
