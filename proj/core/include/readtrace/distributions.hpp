#pragma once

namespace readtrace::stats {

// Regularized lower/upper incomplete gamma P(a, x), Q(a, x) for a > 0, x >= 0.
// Series expansion below x < a + 1, Lentz continued fraction above.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double regularized_beta(double x, double a, double b);

// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double df);

// Two-sided tail P(|T| >= |t|) of Student's t with df degrees of freedom.
double student_t_two_sided(double t, double df);

// Upper tail of the standard normal.
double normal_sf(double z);

}  // namespace readtrace::stats
