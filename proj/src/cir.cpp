#include "cirsum/cir.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cirsum/errors.hpp"
#include "cirsum/specfun.hpp"

namespace cirsum {

bool check_feller(const CirFactor& f) noexcept {
    return 2.0 * f.kappa * f.theta >= f.sigma * f.sigma;
}

void validate_factor(const CirFactor& f, const char* label) {
    const std::string who = std::string("factor ") + label;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw domain_error(who + ": " + name + " must be positive and finite");
    };
    positive(f.kappa, "kappa");
    positive(f.theta, "theta");
    positive(f.sigma, "sigma");
    positive(f.weight_a, "weight_a");
    if (!(f.x0 >= 0.0) || !std::isfinite(f.x0))
        throw domain_error(who + ": x0 must be nonnegative and finite");
    if (!check_feller(f))
        throw domain_error(who + ": Feller condition 2*kappa*theta >= sigma^2 violated");
}

TransitionParams transition_params(const CirFactor& f, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw domain_error("transition_params: dt must be positive and finite");
    TransitionParams p;
    p.dt = dt;
    const double e = std::exp(-f.kappa * dt);
    const double one_minus_e = -std::expm1(-f.kappa * dt);  // 1 - e, accurate for small kappa*dt
    p.c = f.sigma * f.sigma * one_minus_e / (4.0 * f.kappa);
    p.d = 4.0 * f.kappa * f.theta / (f.sigma * f.sigma);
    if (e == 0.0) {
        // exp(-kappa dt) underflowed: the transition has reached its
        // stationary central-chi-square limit; lambda = 0 with a flag rather
        // than a NaN from 0/0 arithmetic downstream.
        p.lambda = 0.0;
        p.lambda_underflowed = true;
    } else {
        p.lambda = 4.0 * f.kappa * e * f.x0 / (f.sigma * f.sigma * one_minus_e);
    }
    p.beta = 2.0 * f.weight_a * p.c;
    return p;
}

double sample_transition(const TransitionParams& p, Rng& rng) {
    const std::uint64_t n = rng.poisson(0.5 * p.lambda);
    const double g = rng.gamma(0.5 * p.d + static_cast<double>(n));
    return p.beta * g;
}

EvalResult single_factor_pdf(const TransitionParams& p, double s, const TruncationPolicy& t) {
    if (!(s > 0.0) || !std::isfinite(s))
        throw domain_error("single_factor_pdf: s must be positive and finite");

    const FactorTruncation plan = plan_factor_truncation(0.5 * p.lambda, t.eps, t.method);

    const double log_s_over_beta = std::log(s / p.beta);
    double value = 0.0;
    for (unsigned i = 0; i < plan.weights.size(); ++i) {
        const double nu = 0.5 * p.d + static_cast<double>(plan.n_lo + i);
        const double log_pdf =
            (nu - 1.0) * log_s_over_beta - s / p.beta - log_gamma(nu) - std::log(p.beta);
        value += plan.weights[i] * std::exp(log_pdf);
    }

    // Every omitted mixture component is a Gamma density; its sup over s is
    // <= 1/beta provided its shape is >= 1.  The smallest omitted shape is
    // d/2 + n for the smallest omitted n.
    double min_omitted_shape = 0.5 * p.d + (plan.n_lo > 0 ? 0.0 : (plan.n_hi + 1.0));
    EvalResult out;
    out.value = value;
    out.trunc_error_bound = (min_omitted_shape >= 1.0)
                                ? plan.dropped / p.beta
                                : std::numeric_limits<double>::infinity();
    out.terms.n1_lo = plan.n_lo;
    out.terms.n1_hi = plan.n_hi;
    return out;
}

}  // namespace cirsum
