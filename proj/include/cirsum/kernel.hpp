#pragma once

#include "cirsum/truncation.hpp"

namespace cirsum {

// Parameters of the density of Y1 + Y2 with independent Yi ~ Gamma(nu_i, beta_i)
// (shape/scale).  Canonical orientation beta2 <= beta1 is established by
// make_kernel_params; the density itself is symmetric under relabeling.
struct KernelParams {
    double nu1;
    double nu2;
    double beta1;
    double beta2;
};

// Validates positivity and swaps the (nu, beta) pairs if needed so that
// beta2 <= beta1.  Throws domain_error on nonpositive or nonfinite input.
KernelParams make_kernel_params(double nu1, double nu2, double beta1, double beta2);

// Density of Y1 + Y2 at s > 0.  Of the two equivalent confluent-hypergeometric
// assemblies, evaluates the one whose 1F1 argument is <= 0; kummer_1f1 then
// applies its reflection internally, so the series that is actually summed has
// positive terms.  Near-equal scales (|1/beta1 - 1/beta2| * s < 1e-12) fall
// back to the closed Gamma(nu1+nu2, beta2) assembly with the 1F1 factor
// replaced by its limit 1.
double kernel_pdf(const KernelParams& k, double s);

// CDF of Y1 + Y2 at s >= 0 as a single nonnegative series of regularized
// lower incomplete gamma values: with delta = beta2/beta1 - 1 in (-1, 0],
//   F(s) = (beta2/beta1)^{nu1} * sum_k (nu1)_k/k! * |delta|^k * P(nu1+nu2+k, s/beta2).
// Terminates when (beta2/beta1)^{nu1} * [(1-|delta|)^{-nu1} - partial
// coefficient sum] (a remainder bound using P <= 1) drops below tol; the
// returned trunc_error_bound carries exactly that remainder bound and
// terms.k_terms the number of series terms consumed.
// Throws budget_error if 10^6 terms do not reach tol.
EvalResult kernel_cdf(const KernelParams& k, double s, double tol);

// Brute-force check value: the convolution integral  int_0^s g1(u) g2(s-u) du
// evaluated by adaptive quadrature after the substitution u = s*t (so the
// integrable endpoint singularities for nu_i < 1 sit at panel boundaries the
// rule never samples).  Absolute error <= 1e-10; shares only log_gamma with
// kernel_pdf.  Throws budget_error carrying the achieved error estimate if
// the quadrature cannot certify the tolerance.
double kernel_pdf_oracle(const KernelParams& k, double s);

namespace detail {

// The two algebraically equivalent assemblies of kernel_pdf, kept separate so
// their pointwise agreement can be checked.  Each is named by the scale whose
// exponential appears in front; the 1F1 argument carries the opposite sign.
//   exp_beta1 form: e^{-s/beta1} * 1F1(nu2; nu1+nu2; s(1/beta1 - 1/beta2))
//   exp_beta2 form: e^{-s/beta2} * 1F1(nu1; nu1+nu2; s(1/beta2 - 1/beta1))
double kernel_pdf_exp_beta1(const KernelParams& k, double s);
double kernel_pdf_exp_beta2(const KernelParams& k, double s);

}  // namespace detail

}  // namespace cirsum
