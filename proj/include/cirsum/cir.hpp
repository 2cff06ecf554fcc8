#pragma once

#include "cirsum/rng.hpp"
#include "cirsum/truncation.hpp"

namespace cirsum {

// Static parameters of one square-root mean-reverting diffusion
//   dX = kappa (theta - X) dt + sigma sqrt(X) dW
// together with its weight a in the observed linear combination.
struct CirFactor {
    double kappa = 0.0;     // mean-reversion rate [1/time]
    double theta = 0.0;     // long-run level [state units]
    double sigma = 0.0;     // volatility [state units^{1/2} / time^{1/2}]
    double x0 = 0.0;        // state at the start of the step [state units]
    double weight_a = 1.0;  // linear-combination coefficient [dimensionless]
};

// True iff 2 kappa theta >= sigma^2 (inclusive), i.e. the origin is
// unattainable and the one-step law has a smooth positive density.
bool check_feller(const CirFactor& f) noexcept;

// Throws domain_error unless all fields are positive (x0 >= 0) and the
// Feller condition holds.  Model builders call this; the plain struct stays
// an aggregate so tests can probe boundary cases directly.
void validate_factor(const CirFactor& f, const char* label);

// Derived one-step transition parameters: conditionally on X_t = x0, the
// weighted state a X_{t+dt} is distributed as (beta/2) * chi^2(d, lambda)
// with beta = 2 a c.
struct TransitionParams {
    double c = 0.0;       // scale of the unweighted chi-square representation
    double d = 0.0;       // degrees of freedom, >= 2 under Feller
    double lambda = 0.0;  // noncentrality, 0 iff x0 = 0
    double beta = 0.0;    // Gamma mixture scale 2 a c
    double dt = 0.0;
    bool lambda_underflowed = false;  // e^{-kappa dt} underflowed; the
                                      // stationary central limit was used
};

TransitionParams transition_params(const CirFactor& f, double dt);

// One exact draw of a X_{t+dt}: N ~ Poisson(lambda/2), G ~ Gamma(d/2 + N,
// scale 1), result beta * G.  No time-discretization error.
double sample_transition(const TransitionParams& p, Rng& rng);

// Density of a X_{t+dt} at s as a truncated Poisson-weighted Gamma mixture
// with a certified dropped-mass bound.  The policy's full eps applies (no
// per-factor split: this is a single-factor evaluation).
EvalResult single_factor_pdf(const TransitionParams& p, double s, const TruncationPolicy& t);

}  // namespace cirsum
