#include "readtrace/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "readtrace/distributions.hpp"
#include "readtrace/error.hpp"

namespace readtrace::stats {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double krippendorff_alpha(const LabelMatrix& matrix) {
  // Dense category ids in sorted order of the label values.
  std::map<int, std::size_t> category;
  for (const auto& item : matrix.items) {
    for (const auto& label : item) {
      if (label) category.emplace(*label, 0);
    }
  }
  std::size_t next = 0;
  for (auto& [value, id] : category) id = next++;
  const std::size_t k = category.size();

  std::vector<double> coincidence(k * k, 0.0);
  std::size_t pairable_items = 0;
  std::vector<double> counts(k);
  for (const auto& item : matrix.items) {
    std::fill(counts.begin(), counts.end(), 0.0);
    double m = 0.0;
    for (const auto& label : item) {
      if (!label) continue;
      counts[category.at(*label)] += 1.0;
      m += 1.0;
    }
    if (m < 2.0) continue;
    ++pairable_items;
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t d = 0; d < k; ++d) {
        const double pairs = c == d ? counts[c] * (counts[c] - 1.0) : counts[c] * counts[d];
        coincidence[c * k + d] += pairs / (m - 1.0);
      }
    }
  }
  if (pairable_items < 2) {
    throw DegenerateDataError("alpha is undefined: fewer than two items carry two or more labels");
  }

  std::vector<double> marginal(k, 0.0);
  double n = 0.0;
  double observed = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      marginal[c] += coincidence[c * k + d];
      if (c != d) observed += coincidence[c * k + d];
    }
    n += marginal[c];
  }
  double expected = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t d = 0; d < k; ++d) {
      if (c != d) expected += marginal[c] * marginal[d];
    }
  }
  if (expected == 0.0) return 1.0;
  return 1.0 - (n - 1.0) * observed / expected;
}

TestResult chi_square_independence(const std::vector<std::vector<std::int64_t>>& table) {
  const std::size_t rows = table.size();
  if (rows < 2) throw DegenerateDataError("contingency table needs at least two rows");
  const std::size_t cols = table.front().size();
  if (cols < 2) throw DegenerateDataError("contingency table needs at least two columns");

  std::vector<double> row_total(rows, 0.0);
  std::vector<double> col_total(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (table[r].size() != cols) throw ValidationError("ragged contingency table", r);
    for (std::size_t c = 0; c < cols; ++c) {
      if (table[r][c] < 0) throw ValidationError("negative count in contingency table", r);
      const auto v = static_cast<double>(table[r][c]);
      row_total[r] += v;
      col_total[c] += v;
      total += v;
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (row_total[r] == 0.0) {
      throw DegenerateDataError("contingency row " + std::to_string(r) + " has a zero total");
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (col_total[c] == 0.0) {
      throw DegenerateDataError("contingency column " + std::to_string(c) + " has a zero total");
    }
  }

  double chi2 = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double expected = row_total[r] * col_total[c] / total;
      const double diff = static_cast<double>(table[r][c]) - expected;
      chi2 += diff * diff / expected;
    }
  }
  TestResult out;
  out.test_name = "chi_square_independence";
  out.statistic = chi2;
  out.df = static_cast<double>((rows - 1) * (cols - 1));
  out.p_raw = chi_square_sf(chi2, out.df);
  out.p_adjusted = out.p_raw;
  out.counts = table;
  return out;
}

TestResult chi_square_goodness(std::span<const std::int64_t> observed,
                               std::span<const double> expected_proportions) {
  if (observed.empty() || observed.size() != expected_proportions.size()) {
    throw ValidationError("observed and expected must be nonempty and of equal length");
  }
  if (observed.size() < 2) throw DegenerateDataError("goodness of fit needs two or more cells");
  const double sum_p =
      std::accumulate(expected_proportions.begin(), expected_proportions.end(), 0.0);
  if (std::fabs(sum_p - 1.0) > 1e-9) {
    throw ValidationError("expected proportions sum to " + std::to_string(sum_p));
  }
  double n = 0.0;
  for (std::int64_t o : observed) {
    if (o < 0) throw ValidationError("negative observed count");
    n += static_cast<double>(o);
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = expected_proportions[i] * n;
    if (!(expected > 0.0)) {
      throw DegenerateDataError("expected count of cell " + std::to_string(i) + " is zero");
    }
    const double diff = static_cast<double>(observed[i]) - expected;
    chi2 += diff * diff / expected;
  }
  TestResult out;
  out.test_name = "chi_square_goodness";
  out.statistic = chi2;
  out.df = static_cast<double>(observed.size() - 1);
  out.p_raw = chi_square_sf(chi2, out.df);
  out.p_adjusted = out.p_raw;
  out.counts = {std::vector<std::int64_t>(observed.begin(), observed.end())};
  return out;
}

TestResult t_test_independent(std::span<const double> a, std::span<const double> b,
                              VarianceModel model) {
  if (a.size() < 2 || b.size() < 2) {
    throw DegenerateDataError("independent t-test needs at least two values per group");
  }
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = std::pow(sample_sd(a), 2);
  const double vb = std::pow(sample_sd(b), 2);

  double se = 0.0;
  double df = 0.0;
  if (model == VarianceModel::Pooled) {
    const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    if (pooled == 0.0) throw DegenerateDataError("pooled variance is zero");
    se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    df = na + nb - 2.0;
  } else {
    const double qa = va / na;
    const double qb = vb / nb;
    if (qa + qb == 0.0) throw DegenerateDataError("both groups have zero variance");
    se = std::sqrt(qa + qb);
    df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
  }
  TestResult out;
  out.test_name = model == VarianceModel::Pooled ? "t_test_independent" : "t_test_welch";
  out.statistic = (ma - mb) / se;
  out.df = df;
  out.p_raw = student_t_two_sided(out.statistic, df);
  out.p_adjusted = out.p_raw;
  out.groups = {GroupSummary{"a", a.size(), ma, std::sqrt(va)},
                GroupSummary{"b", b.size(), mb, std::sqrt(vb)}};
  return out;
}

TestResult t_test_paired(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("paired t-test needs equal-length samples");
  if (x.size() < 2) throw DegenerateDataError("paired t-test needs at least two pairs");
  std::vector<double> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
  const double sd = sample_sd(diff);
  if (sd == 0.0) throw DegenerateDataError("paired differences have zero variance");
  const auto n = static_cast<double>(diff.size());
  TestResult out;
  out.test_name = "t_test_paired";
  out.statistic = mean(diff) / (sd / std::sqrt(n));
  out.df = n - 1.0;
  out.p_raw = student_t_two_sided(out.statistic, out.df);
  out.p_adjusted = out.p_raw;
  out.groups = {GroupSummary{"x", x.size(), mean(x), sample_sd(x)},
                GroupSummary{"y", y.size(), mean(y), sample_sd(y)}};
  return out;
}

std::vector<TestResult> bonferroni(std::vector<TestResult> results, std::size_t m) {
  if (m < results.size()) {
    throw ValidationError("Bonferroni family size " + std::to_string(m) + " is smaller than " +
                          std::to_string(results.size()) + " tests");
  }
  for (TestResult& r : results) {
    r.p_adjusted = std::min(1.0, static_cast<double>(m) * r.p_raw);
  }
  return results;
}

}  // namespace readtrace::stats
