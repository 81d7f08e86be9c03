#include "blockscope/stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace blockscope {

std::string_view to_string(TestMethod m) {
  switch (m) {
    case TestMethod::Exact: return "exact";
    case TestMethod::NormalApproximation: return "normal-approximation";
    case TestMethod::AllValuesIdentical: return "all-values-identical";
  }
  return "exact";
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && values[idx[j + 1]] == values[idx[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace {

std::vector<double> pooled(std::span<const double> a, std::span<const double> b) {
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return all;
}

double u_statistic(const std::vector<double>& ranks, std::size_t n_a) {
  double r = 0.0;
  for (std::size_t i = 0; i < n_a; ++i) r += ranks[i];
  const double na = static_cast<double>(n_a);
  return r - na * (na + 1.0) / 2.0;
}

void require_samples(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("rank_sum_test: both samples need at least one value");
  for (double v : a) {
    if (std::isnan(v)) throw std::invalid_argument("rank_sum_test: NaN in sample");
  }
  for (double v : b) {
    if (std::isnan(v)) throw std::invalid_argument("rank_sum_test: NaN in sample");
  }
}

}  // namespace

double rank_sum_exact_p(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b);
  const std::size_t n = a.size() + b.size();
  if (n > 24) throw std::invalid_argument("rank_sum_exact_p: pooled sample too large to enumerate");
  const auto ranks = midranks(pooled(a, b));
  const double na = static_cast<double>(a.size());
  const double centre = na * static_cast<double>(b.size()) / 2.0;
  const double observed = std::abs(u_statistic(ranks, a.size()) - centre);
  const double offset = na * (na + 1.0) / 2.0;
  std::uint64_t total = 0;
  std::uint64_t extreme = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != a.size()) continue;
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) r += ranks[i];
    }
    ++total;
    if (std::abs(r - offset - centre) >= observed - 1e-9) ++extreme;
  }
  return std::min(1.0, static_cast<double>(extreme) / static_cast<double>(total));
}

NormalApprox rank_sum_normal_p(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b);
  const auto all = pooled(a, b);
  const auto ranks = midranks(all);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  std::vector<double> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double var = na * nb / 12.0 * ((n + 1.0) - (n > 1.0 ? ties / (n * (n - 1.0)) : 0.0));
  if (var <= 0.0) return {0.0, 1.0};
  const double u = u_statistic(ranks, a.size());
  const double dev = std::max(0.0, std::abs(u - na * nb / 2.0) - 0.5);
  NormalApprox out;
  out.z = dev / std::sqrt(var);
  out.p = std::min(1.0, std::erfc(out.z / std::sqrt(2.0)));
  return out;
}

GroupComparison rank_sum_test(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b);
  GroupComparison c;
  c.n_a = a.size();
  c.n_b = b.size();
  c.median_a = median(a);
  c.median_b = median(b);
  c.mean_a = mean(a);
  c.mean_b = mean(b);
  const auto all = pooled(a, b);
  c.u = u_statistic(midranks(all), a.size());
  if (std::all_of(all.begin(), all.end(), [&](double v) { return v == all.front(); })) {
    c.method = TestMethod::AllValuesIdentical;
    c.p = 1.0;
    return c;
  }
  if (all.size() <= kExactRankSumLimit) {
    c.method = TestMethod::Exact;
    c.p = rank_sum_exact_p(a, b);
  } else {
    const NormalApprox na = rank_sum_normal_p(a, b);
    c.method = TestMethod::NormalApproximation;
    c.z = na.z;
    c.p = na.p;
  }
  return c;
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (q < 0.0 || q > 1.0) throw std::invalid_argument("quantile: q outside [0, 1]");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double h = static_cast<double>(s.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= s.size()) return s.back();
  return s[lo] + (h - static_cast<double>(lo)) * (s[lo + 1] - s[lo]);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::vector<double> filter_outliers_iqr(std::span<const double> values) {
  std::vector<double> kept(values.begin(), values.end());
  while (!kept.empty()) {
    const double q1 = quantile(kept, 0.25);
    const double q3 = quantile(kept, 0.75);
    const double iqr = q3 - q1;
    const double lo = q1 - 1.5 * iqr;
    const double hi = q3 + 1.5 * iqr;
    std::vector<double> next;
    std::copy_if(kept.begin(), kept.end(), std::back_inserter(next), [&](double v) { return v >= lo && v <= hi; });
    if (next.size() == kept.size()) break;
    kept = std::move(next);
  }
  return kept;
}

}  // namespace blockscope
