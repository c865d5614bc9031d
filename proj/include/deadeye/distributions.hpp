#pragma once

namespace deadeye::stats {

// Regularised incomplete beta I_x(a, b), evaluated with a modified-Lentz
// continued fraction. Relative accuracy is about 1e-13 for moderate a, b.
double incomplete_beta(double a, double b, double x);

// Two-tailed p for Student's t with `df` degrees of freedom.
double student_t_two_tailed(double t, double df);
double student_t_cdf(double t, double df);

// P(F > f) for an F(d1, d2) variable.
double f_upper_tail(double f, double d1, double d2);

double normal_cdf(double z);

// Limiting distribution of sqrt(n) * D_n: P(K > lambda).
double kolmogorov_upper_tail(double lambda);

}  // namespace deadeye::stats
