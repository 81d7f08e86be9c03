#pragma once

// Two-sample rank-sum test, quantiles and IQR outlier filtering.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blockscope {

enum class TestMethod { Exact, NormalApproximation, AllValuesIdentical };

std::string_view to_string(TestMethod m);

struct GroupComparison {
  std::string metric;
  std::string group_a;
  std::string group_b;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double median_a = 0.0;
  double median_b = 0.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double u = 0.0;  // Mann-Whitney U of sample a
  std::optional<double> z;
  double p = 1.0;  // two-sided
  TestMethod method = TestMethod::Exact;
};

// Pooled sizes up to this use the exact permutation distribution.
inline constexpr std::size_t kExactRankSumLimit = 12;

// Mann-Whitney U with midranks; exact two-sided p by enumeration when
// n_a + n_b <= 12, else normal approximation with tie and continuity corrections.
GroupComparison rank_sum_test(std::span<const double> a, std::span<const double> b);

// Midranks (1-based) of the pooled sample.
std::vector<double> midranks(std::span<const double> values);

// Exact two-sided p by enumerating every assignment of the pooled midranks.
double rank_sum_exact_p(std::span<const double> a, std::span<const double> b);
struct NormalApprox {
  double z = 0.0;
  double p = 1.0;
};
NormalApprox rank_sum_normal_p(std::span<const double> a, std::span<const double> b);

// Linear interpolation between order statistics (type 7).
double quantile(std::span<const double> values, double q);
double median(std::span<const double> values);
double mean(std::span<const double> values);

// Drops values outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR], repeating until nothing
// more is dropped. Input order is kept.
std::vector<double> filter_outliers_iqr(std::span<const double> values);

}  // namespace blockscope
