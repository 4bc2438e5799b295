#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "readtrace/error.hpp"
#include "readtrace/random.hpp"
#include "readtrace/stats.hpp"

using namespace readtrace;
using namespace readtrace::stats;

namespace {

using Items = std::vector<std::vector<std::optional<int>>>;

Items random_matrix(Rng& rng, std::size_t items, std::size_t coders, int categories,
                    double missing) {
  Items m(items, std::vector<std::optional<int>>(coders));
  for (auto& row : m) {
    for (auto& cell : row) {
      if (rng.uniform() >= missing) cell = static_cast<int>(rng.below(static_cast<std::size_t>(categories)));
    }
  }
  return m;
}

std::size_t pairable(const Items& m) {
  return static_cast<std::size_t>(std::count_if(m.begin(), m.end(), [](const auto& row) {
    return std::count_if(row.begin(), row.end(), [](const auto& c) { return c.has_value(); }) >= 2;
  }));
}

}  // namespace

TEST_CASE("alpha: perfect agreement is exactly one") {
  CHECK(krippendorff_alpha({{{0, 0, 0}, {1, 1, 1}, {0, 0, std::nullopt}}}) == 1.0);
  // Single category everywhere: no expected disagreement.
  CHECK(krippendorff_alpha({{{1, 1}, {1, 1}}}) == 1.0);
}

TEST_CASE("alpha: two items by two coders") {
  // Values A=0, B=1: [[A,A],[A,B]]. Coincidences: o_AA = 2, o_AB = o_BA = 1.
  // n = 4, n_A = 3, n_B = 1. D_o = 2/4, D_e = 2*3*1/(4*3). alpha = 1 - 1 = 0.
  // Written out: 1 - (n-1) * o_AB*2 / (2 * n_A * n_B) = 1 - 3*2/6 = 0.
  const double alpha = krippendorff_alpha({{{0, 0}, {0, 1}}});
  CHECK(std::fabs(alpha - 0.0) <= 1e-12);
  CHECK(std::fabs(alpha - oracle::alpha_pairwise({{0, 0}, {0, 1}})) <= 1e-12);
}

TEST_CASE("alpha: textbook example") {
  // Krippendorff's nominal example with missing data (4 coders, 12 units;
  // categories 1..5), published value 0.743.
  const std::optional<int> _;
  const Items m{{1, 1, _, 1}, {2, 2, 3, 2}, {3, 3, 3, 3}, {3, 3, 3, 3}, {2, 2, 2, 2},
                {1, 2, 3, 4}, {4, 4, 4, 4}, {1, 1, 2, 1}, {2, 2, 2, 2}, {_, 5, 5, 5},
                {_, _, 1, 1}, {_, _, 3, _}};
  CHECK(krippendorff_alpha({m}) == doctest::Approx(0.743).epsilon(0.0005));
  CHECK(std::fabs(krippendorff_alpha({m}) - oracle::alpha_pairwise(m)) <= 1e-12);
}

TEST_CASE("alpha matches pairwise enumeration on random matrices") {
  Rng rng(17);
  int compared = 0;
  for (int round = 0; round < 300; ++round) {
    const auto m = random_matrix(rng, 2 + rng.below(29), 2 + rng.below(3), 2 + static_cast<int>(rng.below(3)), 0.1);
    if (pairable(m) < 2) continue;
    const double a = krippendorff_alpha({m});
    CHECK(std::fabs(a - oracle::alpha_pairwise(m)) <= 1e-9);
    CHECK(a <= 1.0);
    ++compared;
  }
  CHECK(compared > 250);
}

TEST_CASE("property: alpha ignores item and coder order") {
  Rng rng(18);
  for (int round = 0; round < 100; ++round) {
    auto m = random_matrix(rng, 20, 3, 2, 0.1);
    if (pairable(m) < 2) continue;
    const double a = krippendorff_alpha({m});
    std::reverse(m.begin(), m.end());
    for (auto& row : m) std::rotate(row.begin(), row.begin() + 1, row.end());
    CHECK(krippendorff_alpha({m}) == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("alpha is undefined without two pairable items") {
  CHECK_THROWS_AS(krippendorff_alpha({{{0, std::nullopt}, {1, std::nullopt}}}), DegenerateDataError);
  CHECK_THROWS_AS(krippendorff_alpha({{{0, 1}}}), DegenerateDataError);
  CHECK_THROWS_AS(krippendorff_alpha({}), DegenerateDataError);
}

TEST_CASE("chi-square independence") {
  const auto even = chi_square_independence({{10, 10}, {10, 10}});
  CHECK(even.statistic == 0.0);
  CHECK(even.p_raw == 1.0);
  CHECK(even.df == 1.0);
  const auto split = chi_square_independence({{10, 0}, {0, 10}});
  CHECK(split.statistic == doctest::Approx(20.0).epsilon(1e-14));
  CHECK(split.df == 1.0);
  const auto wide = chi_square_independence({{5, 8, 12}, {9, 4, 7}, {3, 6, 10}});
  CHECK(wide.df == 4.0);
  CHECK(wide.counts.size() == 3);
}

TEST_CASE("chi-square independence names degenerate margins") {
  CHECK_THROWS_WITH_AS(chi_square_independence({{0, 0}, {3, 4}}), doctest::Contains("row 0"),
                       DegenerateDataError);
  CHECK_THROWS_WITH_AS(chi_square_independence({{3, 0}, {4, 0}}), doctest::Contains("column 1"),
                       DegenerateDataError);
}

TEST_CASE("property: chi-square is non-negative and transpose invariant") {
  Rng rng(19);
  for (int round = 0; round < 300; ++round) {
    const std::size_t r = 2 + rng.below(4), c = 2 + rng.below(4);
    std::vector<std::vector<std::int64_t>> t(r, std::vector<std::int64_t>(c));
    for (auto& row : t) {
      for (auto& x : row) x = 1 + static_cast<std::int64_t>(rng.below(40));
    }
    std::vector<std::vector<std::int64_t>> tt(c, std::vector<std::int64_t>(r));
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) tt[j][i] = t[i][j];
    }
    const auto a = chi_square_independence(t);
    const auto b = chi_square_independence(tt);
    CHECK(a.statistic >= 0.0);
    CHECK(a.statistic == doctest::Approx(b.statistic).epsilon(1e-12));
    CHECK(a.df == b.df);
    CHECK(a.p_raw >= 0.0);
    CHECK(a.p_raw <= 1.0);
  }
}

TEST_CASE("chi-square goodness of fit") {
  const std::vector<double> fair{0.5, 0.5};
  const std::vector<std::int64_t> even{50, 50}, skew{60, 40}, zero_cell{3, 4};
  CHECK(chi_square_goodness(even, fair).statistic == 0.0);
  const auto r = chi_square_goodness(skew, fair);
  CHECK(r.statistic == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(r.df == 1.0);
  const std::vector<double> lopsided{1.0, 0.0};
  CHECK_THROWS_AS(chi_square_goodness(zero_cell, lopsided), DegenerateDataError);
  const std::vector<double> bad_sum{0.5, 0.4};
  CHECK_THROWS_AS(chi_square_goodness(even, bad_sum), ValidationError);
}

TEST_CASE("independent t-test") {
  const std::vector<double> a{1, 2, 3}, b{2, 3, 4};
  const auto r = t_test_independent(a, b);
  CHECK(r.statistic == doctest::Approx(-1.224744871391589).epsilon(1e-12));
  CHECK(r.df == 4.0);
  const auto same = t_test_independent(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_raw == 1.0);
  REQUIRE(r.groups.size() == 2);
  CHECK(r.groups[0].mean == 2.0);
  CHECK(r.groups[1].n == 3);
  CHECK(r.groups[1].sd == 1.0);
  const std::vector<double> flat{5, 5, 5};
  CHECK_THROWS_AS(t_test_independent(flat, flat), DegenerateDataError);
  const std::vector<double> one{1};
  CHECK_THROWS_AS(t_test_independent(one, a), DegenerateDataError);
}

TEST_CASE("welch t-test") {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8, 10, 12};
  const auto r = t_test_independent(a, b, VarianceModel::Welch);
  // Hand computation: var_a = 5/3, var_b = 14; se^2 = 5/12 + 14/6.
  const double se = std::sqrt(5.0 / 12.0 + 14.0 / 6.0);
  CHECK(r.statistic == doctest::Approx((2.5 - 7.0) / se).epsilon(1e-12));
  const double qa = 5.0 / 12.0, qb = 14.0 / 6.0;
  CHECK(r.df == doctest::Approx((qa + qb) * (qa + qb) / (qa * qa / 3.0 + qb * qb / 5.0)).epsilon(1e-12));
}

TEST_CASE("t-test p-values match quadrature") {
  Rng rng(23);
  for (int round = 0; round < 100; ++round) {
    std::vector<double> a(2 + rng.below(30)), b(2 + rng.below(30));
    for (auto& x : a) x = rng.uniform(0.0, 10.0);
    for (auto& x : b) x = rng.uniform(0.5, 10.5);
    const auto r = t_test_independent(a, b);
    CHECK(std::fabs(r.p_raw - oracle::t_two_sided_quadrature(r.statistic, r.df)) <= 1e-8);
    const auto swapped = t_test_independent(b, a);
    CHECK(swapped.statistic == doctest::Approx(-r.statistic).epsilon(1e-12));
    CHECK(swapped.p_raw == doctest::Approx(r.p_raw).epsilon(1e-12));

    std::vector<double> x(a.size()), y(a.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.uniform(0.0, 5.0);
      y[i] = x[i] + rng.uniform(-1.0, 1.3);
    }
    const auto p = t_test_paired(x, y);
    CHECK(p.df == static_cast<double>(x.size() - 1));
    CHECK(std::fabs(p.p_raw - oracle::t_two_sided_quadrature(p.statistic, p.df)) <= 1e-8);
    CHECK(t_test_paired(y, x).statistic == doctest::Approx(-p.statistic).epsilon(1e-12));
  }
}

TEST_CASE("paired t-test") {
  const std::vector<double> x{1, 2, 3, 4};
  CHECK_THROWS_AS(t_test_paired(x, x), DegenerateDataError);
  const std::vector<double> y{0, 0.5, 2.2, 2.9};  // differences all near +1
  CHECK(t_test_paired(x, y).statistic > 0.0);
  const std::vector<double> short_y{1, 2};
  CHECK_THROWS_AS(t_test_paired(x, short_y), ValidationError);
}

TEST_CASE("bonferroni") {
  const auto with_p = [](std::vector<double> ps) {
    std::vector<TestResult> out;
    for (double p : ps) {
      TestResult r;
      r.p_raw = p;
      out.push_back(r);
    }
    return out;
  };
  auto r = bonferroni(with_p({0.01, 0.4}), 5);
  CHECK(r[0].p_adjusted == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(r[1].p_adjusted == 1.0);
  CHECK(bonferroni(with_p({0.001}), 2)[0].p_adjusted == doctest::Approx(0.002).epsilon(1e-15));
  CHECK_THROWS_AS(bonferroni(with_p({0.1, 0.2, 0.3}), 2), ValidationError);

  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform();
    const auto adj = bonferroni(with_p({p}), 1 + rng.below(10))[0];
    CHECK(adj.p_adjusted >= p);
    CHECK(adj.p_adjusted <= 1.0);
  }
  CHECK_FALSE(r[0].significant());  // 0.05 is not below 0.05
}
