#pragma once

namespace sva {

// Regularized incomplete beta function I_x(a, b).
double incbeta(double a, double b, double x);

double normal_pdf(double x);
double normal_cdf(double x);
// Inverse of normal_cdf, accurate to ~1e-15 after Halley refinement.
double normal_quantile(double p);

// Upper tail of the F distribution: P[F_{d1,d2} > f].
double f_sf(double f, double d1, double d2);

// Two-sided p-value of a t statistic with df degrees of freedom.
double t_twosided_p(double t, double df);

// Asymptotic Kolmogorov tail Q(x) = 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_sf(double x);

// Exact finite-sample CDF P[D_n < d] of the two-sided Kolmogorov-Smirnov
// statistic (Marsaglia-Tsang-Wang matrix method). Intended for small n.
double ks_cdf_exact(int n, double d);

}  // namespace sva
