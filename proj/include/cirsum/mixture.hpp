#pragma once

#include <cstddef>
#include <vector>

#include "cirsum/cir.hpp"
#include "cirsum/truncation.hpp"

namespace cirsum {

// The weighted two-factor sum S = a1 X^(1)_{t+dt} + a2 X^(2)_{t+dt}, with the
// per-factor transition parameters derived once at construction.  Immutable
// after make_sum_model; all evaluations are const and thread-safe.
struct SumModel {
    CirFactor factor1;
    CirFactor factor2;
    double dt = 0.0;
    TransitionParams derived1;
    TransitionParams derived2;
};

// Validates both factors (positivity + Feller) and dt, then derives the
// transition parameters.  Throws domain_error on any violation.
SumModel make_sum_model(const CirFactor& f1, const CirFactor& f2, double dt);

// Density of S at s > 0: truncated double Poisson mixture of Gamma-convolution
// kernels.  trunc_error_bound = (dropped product-grid mass) * sup over kernel
// densities, the sup being 1/max(beta1, beta2) since every component shape is
// >= 1 under Feller.
EvalResult pdf(const SumModel& m, double s, const TruncationPolicy& t);

// CDF of S at s >= 0: the same double mixture with each cell's conditional CDF
// evaluated as its own certified series (per-cell tolerance = policy eps).
// Value clamped to [0,1]; the clamp magnitude must lie within the certified
// bound, otherwise a logic fault is reported.  terms.k_terms records the
// deepest inner-series depth used across cells.
EvalResult cdf(const SumModel& m, double s, const TruncationPolicy& t);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

// Closed-form mean and variance:
//   E[S]   = sum_i a_i c_i (d_i + lambda_i)
//   Var(S) = 2 sum_i (a_i c_i)^2 (d_i + 2 lambda_i)
Moments moments(const SumModel& m);

// Laplace transform E[e^{-uS}] in closed form, log-space assembly:
//   prod_i (1 + beta_i u)^{-d_i/2} exp(-(lambda_i/2) beta_i u / (1 + beta_i u)).
// Domain u > -1/max(beta_i); at or below the pole throws domain_error.
double laplace_closed(const SumModel& m, double u);

// The same transform as a truncated double Poisson sum of Gamma transforms
// (it factorizes into a product of two single sums).  Used as a runtime
// identity check against laplace_closed.  For u < 0 the summand grows in n,
// so the certified bound uses the exact exponentially-tilted Poisson tail.
EvalResult laplace_series(const SumModel& m, double u, const TruncationPolicy& t);

struct GaussianLimitStats {
    double mean_approx = 0.0;
    double var_approx = 0.0;
};

// Leading-order conditional mean and variance of the small-dt Gaussian limit:
//   mean ~= sum_i a_i (x_i + kappa_i (theta_i - x_i) dt),
//   var  ~= dt sum_i a_i^2 sigma_i^2 x_i.
GaussianLimitStats gaussian_limit_stats(const SumModel& m);

// Batch evaluator for pdf/cdf over many s values.  Construction folds the
// whole truncated double mixture into a single-scale Gamma mixture
//   f_S(s) ~= sum_m C_m * Gamma(A0 + m, beta_s) density,
// by re-expanding the larger-scale factor on the smaller scale beta_s with
// negative-binomial regrouping weights (exact identity; its truncation adds
// an exactly-tracked extra dropped mass).  Per evaluation, the incomplete
// gamma column P(A0 + m, x) and the density column are advanced by one-step
// recurrences instead of being recomputed, so a point costs O(#coefficients).
// Equal scales skip the regrouping: the mixture collapses to one Poisson
// index with combined mean (lambda1 + lambda2)/2.
//
// The certified bounds are uniform in s:
//   cdf error <= dropped mass (Poisson rectangle + regrouping tails),
//   pdf error <= pois_dropped / max(beta) + regroup_dropped / beta_s.
class GroupedEvaluator {
  public:
    GroupedEvaluator(const SumModel& m, const TruncationPolicy& t);

    double pdf_at(double s) const;  // s > 0
    double cdf_at(double s) const;  // s >= 0; 0 at s = 0

    std::vector<double> pdf_many(const std::vector<double>& s) const;
    std::vector<double> cdf_many(const std::vector<double>& s) const;

    double pdf_error_bound() const { return pdf_bound_; }
    double cdf_error_bound() const { return cdf_bound_; }
    std::size_t coefficient_count() const { return coef_.size(); }

  private:
    double base_shape_ = 0.0;  // A0 = (d1 + d2)/2
    double scale_ = 0.0;       // beta_s, the smaller Gamma scale
    std::vector<double> coef_;
    double cdf_bound_ = 0.0;
    double pdf_bound_ = 0.0;
};

}  // namespace cirsum
