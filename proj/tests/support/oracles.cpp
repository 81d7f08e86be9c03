#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace testsupport {

using blockscope::Block;
using blockscope::BlockSeq;

std::size_t oracle_category_index(const std::string& op) {
  static const std::vector<std::pair<std::string, std::size_t>> prefixes{
      {"motion_", 0}, {"looks_", 1}, {"sound_", 2}, {"music_", 2},   {"event_", 3},
      {"control_", 4}, {"sensing_", 5}, {"operator_", 6}, {"data_", 7}, {"pen_", 8},
  };
  for (const auto& [p, i] : prefixes) {
    if (op.rfind(p, 0) == 0) return i;
  }
  return 9;
}

namespace {

int concept_index(const std::string& op) {
  static const std::map<std::string, int> table{
      {"control_if", 0},           {"motion_ifonedgebounce", 0},   {"control_if_else", 0},
      {"event_broadcast", 1},      {"event_whenbroadcastreceived", 1}, {"event_broadcastandwait", 1},
      {"control_wait", 1},         {"control_wait_until", 1},      {"control_repeat", 2},
      {"control_repeat_until", 2}, {"control_forever", 2},         {"data_changevariableby", 3},
      {"data_setvariableto", 3},   {"data_variable", 3},           {"data_showvariable", 3},
      {"data_hidevariable", 3},
  };
  auto it = table.find(op);
  return it == table.end() ? -1 : it->second;
}

bool decision(const std::string& op) {
  static const std::set<std::string> ops{"control_if",           "control_if_else", "control_repeat",
                                         "control_repeat_until", "control_forever", "control_wait_until"};
  return ops.contains(op);
}

void visit(const Block& b, CountOracle& c);

void visit(const BlockSeq& seq, CountOracle& c) {
  for (const Block& b : seq) visit(b, c);
}

void visit(const Block& b, CountOracle& c) {
  ++c.blocks;
  ++c.categories[oracle_category_index(b.opcode)];
  ++c.opcodes[b.opcode];
  if (int k = concept_index(b.opcode); k >= 0) ++c.concepts[static_cast<std::size_t>(k)];
  if (decision(b.opcode)) ++c.decisions;
  for (const auto& in : b.inputs) {
    if (const auto* ref = std::get_if<blockscope::BlockRef>(&in.value)) visit(ref->blocks, c);
  }
  for (const BlockSeq& s : b.substacks) visit(s, c);
}

}  // namespace

CountOracle brute_force_counts(const blockscope::Script& script) {
  CountOracle c;
  visit(script.hat, c);
  visit(script.body, c);
  return c;
}

CountOracle brute_force_counts(const blockscope::Project& project) {
  CountOracle c;
  std::vector<const blockscope::Sprite*> all{&project.stage};
  for (const auto& s : project.sprites) all.push_back(&s);
  for (const auto* s : all) {
    for (const auto& sc : s->scripts) {
      visit(sc.hat, c);
      visit(sc.body, c);
    }
    for (const auto& o : s->orphan_blocks) visit(o, c);
  }
  return c;
}

blockscope::HalsteadMetrics halstead_oracle(const blockscope::Project& p) {
  using namespace blockscope;
  std::size_t N1 = 0, N2 = 0;
  std::set<std::string> ops, vals;
  std::function<void(const Block&)> walk = [&](const Block& b) {
    ++N1;
    ops.insert(b.opcode);
    for (const Input& in : b.inputs) {
      if (auto* l = std::get_if<Literal>(&in.value)) {
        ++N2;
        vals.insert(l->text);
      } else if (auto* m = std::get_if<MenuSelection>(&in.value)) {
        ++N2;
        vals.insert(m->value);
      } else {
        for (const Block& r : std::get<BlockRef>(in.value).blocks) walk(r);
      }
    }
    for (const BlockSeq& s : b.substacks) {
      for (const Block& c : s) walk(c);
    }
  };
  for (const Sprite* s : targets(p)) {
    for (const Script& sc : s->scripts) {
      walk(sc.hat);
      for (const Block& b : sc.body) walk(b);
    }
    for (const BlockSeq& o : s->orphan_blocks) {
      for (const Block& b : o) walk(b);
    }
  }
  HalsteadMetrics h;
  h.total_operators = N1;
  h.total_operands = N2;
  h.unique_operators = ops.size();
  h.unique_operands = vals.size();
  return h;
}

double enumeration_rank_sum_p(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pool(a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());
  const std::size_t na = a.size();
  const std::size_t n = pool.size();
  // 2U counted in half-units so ties stay integral.
  auto twice_u = [&](const std::vector<bool>& in_a) {
    long u2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_a[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (in_a[j]) continue;
        if (pool[i] > pool[j]) u2 += 2;
        else if (pool[i] == pool[j]) u2 += 1;
      }
    }
    return u2;
  };
  const long centre2 = static_cast<long>(na * (n - na));  // 2 * (na*nb/2)
  std::vector<bool> observed(n, false);
  std::fill(observed.begin(), observed.begin() + static_cast<long>(na), true);
  const long obs = std::labs(twice_u(observed) - centre2);

  // Every subset of size na, via prev_permutation on a sorted mask.
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(na), true);
  long total = 0, extreme = 0;
  do {
    ++total;
    if (std::labs(twice_u(mask) - centre2) >= obs) ++extreme;
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double direct_kl(const blockscope::Matrix& p, std::span<const double> y) {
  const std::size_t n = p.rows;
  auto kernel = [&](std::size_t i, std::size_t j) {
    const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
    return 1.0 / (1.0 + dx * dx + dy * dy);
  };
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) z += kernel(i, j);
    }
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && p(i, j) > 0.0) kl += p(i, j) * std::log(p(i, j) / (kernel(i, j) / z));
    }
  }
  return kl;
}

std::vector<double> finite_difference_kl_gradient(const blockscope::Matrix& p, std::span<const double> y, double h) {
  std::vector<double> work(y.begin(), y.end());
  std::vector<double> g(y.size());
  for (std::size_t c = 0; c < y.size(); ++c) {
    const double keep = work[c];
    work[c] = keep + h;
    const double up = direct_kl(p, work);
    work[c] = keep - h;
    const double down = direct_kl(p, work);
    work[c] = keep;
    g[c] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace testsupport
