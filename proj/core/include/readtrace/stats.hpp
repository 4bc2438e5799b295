#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace readtrace::stats {

inline constexpr double kSignificanceLevel = 0.05;

struct GroupSummary {
  std::string name;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample sd (n - 1)
};

struct TestResult {
  std::string test_name;
  double statistic = 0.0;
  double df = 0.0;
  double p_raw = 1.0;
  double p_adjusted = 1.0;
  std::vector<GroupSummary> groups;               // t-tests
  std::vector<std::vector<std::int64_t>> counts;  // chi-square tables

  bool significant(double level = kSignificanceLevel) const { return p_adjusted < level; }
};

// Items x coders grid of nominal labels; nullopt marks a missing cell.
// Rows may have different lengths.
struct LabelMatrix {
  std::vector<std::vector<std::optional<int>>> items;
};

// Krippendorff's alpha for nominal data, computed from the coincidence
// matrix. Only items with at least two labels are pairable. Returns 1.0 when
// every pairable label is the same category. Throws DegenerateDataError when
// fewer than two items are pairable.
double krippendorff_alpha(const LabelMatrix& matrix);

// Pearson chi-square test of independence on an r x c table of counts.
// Throws DegenerateDataError naming the row or column with a zero total.
TestResult chi_square_independence(const std::vector<std::vector<std::int64_t>>& table);

// Goodness of fit of observed counts against expected proportions summing
// to one. Throws DegenerateDataError on a zero expected cell.
TestResult chi_square_goodness(std::span<const std::int64_t> observed,
                               std::span<const double> expected_proportions);

enum class VarianceModel { Pooled, Welch };

// Two-sample t-test of a against b; the statistic is (mean_a - mean_b) / se.
// Pooled (Student) by default. Throws DegenerateDataError on groups with
// fewer than two values or zero variance.
TestResult t_test_independent(std::span<const double> a, std::span<const double> b,
                              VarianceModel model = VarianceModel::Pooled);

// One-sample t-test on x - y. Throws ValidationError on unequal lengths and
// DegenerateDataError when the differences have zero variance.
TestResult t_test_paired(std::span<const double> x, std::span<const double> y);

// p_adjusted = min(1, m * p_raw). Throws ValidationError if m < results.size().
std::vector<TestResult> bonferroni(std::vector<TestResult> results, std::size_t m);

double mean(std::span<const double> values);
// Sample standard deviation; 0 for fewer than two values.
double sample_sd(std::span<const double> values);

}  // namespace readtrace::stats
