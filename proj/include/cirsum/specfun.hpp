#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace cirsum {

// Scalar special functions every higher layer builds on.  All routines are
// pure functions of their arguments and safe to call concurrently.

// A real number carried as sign * exp(log_magnitude).  Used wherever products
// of Gamma functions, powers of small scales, and long series prefactors
// would overflow or underflow a plain double.
struct LogValue {
    double log_magnitude = 0.0;  // ln|value|; ignored when sign == 0
    int sign = 0;                // +1, -1 or 0

    static LogValue zero() { return {0.0, 0}; }
    static LogValue from_value(double v);
    static LogValue from_log(double log_mag, int sgn = +1) { return {log_mag, sgn}; }

    // May round to 0 or +-inf when the magnitude leaves double range.
    double value() const;
};

// ln Gamma(a) for a > 0.  Relative error <= 1e-13 across [1e-6, 1e6],
// including the neighbourhoods of the zeros at a = 1 and a = 2 (handled by a
// local Taylor series; elsewhere Lanczos).
double log_gamma(double a);

// Regularized lower incomplete gamma P(a, x) = gamma(a,x)/Gamma(a), a > 0,
// x >= 0.  Power series for x < a+1, continued fraction otherwise.
double reg_lower_gamma(double a, double x);

// Complement Q(a, x) = 1 - P(a, x), computed from the continued fraction on
// its own branch (not as 1 - P), so P + Q == 1 can be asserted meaningfully.
double reg_upper_gamma(double a, double x);

// Kummer's confluent hypergeometric function 1F1(a; b; z) for a > 0, b > 0.
// For z <= 0 the alternating series is never summed directly: the identity
// 1F1(a;b;z) = e^z 1F1(b-a; b; -z) is applied first, which requires b >= a
// (all call sites in this library satisfy it; violations throw).  The
// positive-term series stops once a term falls below 1e-16 of the running
// sum; more than 1e6 terms raises budget_error.
LogValue kummer_1f1(double a, double b, double z);

// ln of the rising factorial (v)_k = v (v+1) ... (v+k-1); exact 0 for k = 0.
double log_pochhammer(double v, unsigned k);

// Poisson pmf values w_0 .. w_n_max at the given mean, each computed in
// log space and exponentiated individually (no running-product drift).
std::vector<double> poisson_weights(double mean, unsigned n_max);

// Smallest J such that P(N > J) <= eps for N ~ Poisson(mean).  Exact for any
// representable eps: the tail is evaluated in log space, so eps down to the
// smallest positive double is honoured.  Above mean = 1e4 the search starts
// from the normal-approximation guess mean + Phi^{-1}(1-eps) sqrt(mean) and
// is then verified/adjusted against the exact tail.
unsigned poisson_tail_quantile(double mean, double eps);

// Exact upper tail P(N > j) for N ~ Poisson(mean), evaluated in log space;
// never rounds to zero (floored at the smallest positive double) so it can
// serve as a certified bound.
double poisson_upper_tail(double mean, unsigned j);

// ln P(N > j), same contract as above but usable when the tail underflows.
double log_poisson_upper_tail(double mean, unsigned j);

// Standard normal quantile Phi^{-1}(p), 0 < p < 1; absolute error <= 1e-9
// (rational initial guess refined by one Halley step against erfc).
double normal_quantile(double p);

}  // namespace cirsum
