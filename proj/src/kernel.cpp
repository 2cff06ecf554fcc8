#include "cirsum/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "cirsum/errors.hpp"
#include "cirsum/quadrature.hpp"
#include "cirsum/specfun.hpp"

namespace cirsum {

namespace {

void check_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw domain_error(std::string("kernel: ") + name + " must be positive and finite");
}

// log of the prefactor common to both assemblies (everything except the
// exponential and the 1F1 factor).
double log_prefactor(const KernelParams& k, double s) {
    const double a0 = k.nu1 + k.nu2;
    return (a0 - 1.0) * std::log(s) - log_gamma(a0) - k.nu1 * std::log(k.beta1) -
           k.nu2 * std::log(k.beta2);
}

void require_pdf_args(const KernelParams& k, double s) {
    check_positive(k.nu1, "nu1");
    check_positive(k.nu2, "nu2");
    check_positive(k.beta1, "beta1");
    check_positive(k.beta2, "beta2");
    if (!(s > 0.0) || !std::isfinite(s))
        throw domain_error("kernel_pdf: s must be positive and finite");
}

}  // namespace

KernelParams make_kernel_params(double nu1, double nu2, double beta1, double beta2) {
    check_positive(nu1, "nu1");
    check_positive(nu2, "nu2");
    check_positive(beta1, "beta1");
    check_positive(beta2, "beta2");
    KernelParams k{nu1, nu2, beta1, beta2};
    if (k.beta2 > k.beta1) {
        std::swap(k.nu1, k.nu2);
        std::swap(k.beta1, k.beta2);
    }
    return k;
}

namespace detail {

double kernel_pdf_exp_beta1(const KernelParams& k, double s) {
    require_pdf_args(k, s);
    const double a0 = k.nu1 + k.nu2;
    const double z = s * (1.0 / k.beta1 - 1.0 / k.beta2);
    const LogValue f = kummer_1f1(k.nu2, a0, z);
    return f.sign * std::exp(log_prefactor(k, s) - s / k.beta1 + f.log_magnitude);
}

double kernel_pdf_exp_beta2(const KernelParams& k, double s) {
    require_pdf_args(k, s);
    const double a0 = k.nu1 + k.nu2;
    const double z = s * (1.0 / k.beta2 - 1.0 / k.beta1);
    const LogValue f = kummer_1f1(k.nu1, a0, z);
    return f.sign * std::exp(log_prefactor(k, s) - s / k.beta2 + f.log_magnitude);
}

}  // namespace detail

double kernel_pdf(const KernelParams& params, double s) {
    require_pdf_args(params, s);
    KernelParams k = params;
    if (k.beta2 > k.beta1) {
        std::swap(k.nu1, k.nu2);
        std::swap(k.beta1, k.beta2);
    }
    const double z = s * (1.0 / k.beta1 - 1.0 / k.beta2);  // <= 0 now
    if (-z < 1e-12) {
        // Scales coincide to working precision: the 1F1 factor is 1 + O(1e-12)
        // and the assembly collapses to a Gamma(nu1+nu2, beta2) density.
        return std::exp(log_prefactor(k, s) - s / k.beta2);
    }
    return detail::kernel_pdf_exp_beta1(k, s);
}

EvalResult kernel_cdf(const KernelParams& params, double s, double tol) {
    if (!(tol > 0.0)) throw domain_error("kernel_cdf: tol must be positive");
    if (!(s >= 0.0) || !std::isfinite(s))
        throw domain_error("kernel_cdf: s must be nonnegative and finite");

    KernelParams k = params;
    if (k.beta2 > k.beta1) {
        std::swap(k.nu1, k.nu2);
        std::swap(k.beta1, k.beta2);
    }

    EvalResult out;
    if (s == 0.0) {
        out.value = 0.0;
        out.trunc_error_bound = 0.0;
        out.terms.k_terms = 0;
        return out;
    }

    const double a0 = k.nu1 + k.nu2;
    const double x = s / k.beta2;
    const double abs_delta = -(k.beta2 / k.beta1 - 1.0);  // |delta| in [0, 1)
    const double log_x = std::log(x);

    // Folded coefficients t_k = (beta2/beta1)^{nu1} * (nu1)_k/k! * |delta|^k
    // sum exactly to 1 over k, so the remainder bound is 1 - (their partial
    // sum).  Start in log space in case the k=0 coefficient underflows.
    double log_t = k.nu1 * std::log(k.beta2 / k.beta1);
    const double log_contrib = std::log(abs_delta > 0.0 ? abs_delta : 0.0);

    // P_k = P(a0 + k, x) by downward-mass recurrence P(a+1,x) = P(a,x) - g(a),
    // g(a) = x^a e^{-x} / Gamma(a+1); g is carried in log space so it can dip
    // under the double range and resurface.
    double p = reg_lower_gamma(a0, x);
    double log_g = a0 * log_x - x - log_gamma(a0 + 1.0);

    double value = 0.0, value_c = 0.0;  // Kahan
    double cum_t = 0.0, cum_c = 0.0;
    const unsigned idx_max = 1000000;
    unsigned idx = 0;
    for (;; ++idx) {
        if (idx == idx_max)
            throw budget_error("kernel_cdf: series did not certify tolerance within 1e6 terms");
        const double t = (log_t > -700.0) ? std::exp(log_t) : 0.0;
        if (p < 0.0) p = 0.0;

        double y = t * p - value_c;
        double tmp = value + y;
        value_c = (tmp - value) - y;
        value = tmp;

        y = t - cum_c;
        tmp = cum_t + y;
        cum_c = (tmp - cum_t) - y;
        cum_t = tmp;

        const double remainder = 1.0 - cum_t;
        if (remainder < tol) {
            out.trunc_error_bound = std::max(0.0, remainder);
            break;
        }

        log_t += log_contrib + std::log((k.nu1 + idx) / (idx + 1.0));
        p -= (log_g > -745.0) ? std::exp(log_g) : 0.0;
        log_g += log_x - std::log(a0 + idx + 1.0);
        if ((idx & 8191u) == 8191u) p = reg_lower_gamma(a0 + (idx + 1.0), x);
    }

    out.value = std::min(1.0, std::max(0.0, value));
    out.terms.k_terms = idx + 1;
    return out;
}

double kernel_pdf_oracle(const KernelParams& k, double s) {
    require_pdf_args(k, s);
    // Plain Gamma(nu, beta) log-density; deliberately self-contained.
    auto log_gamma_pdf = [](double v, double nu, double beta) {
        return (nu - 1.0) * std::log(v) - v / beta - log_gamma(nu) - nu * std::log(beta);
    };
    auto integrand = [&](double t) {
        const double u = s * t;
        const double w = s * (1.0 - t);
        if (u <= 0.0 || w <= 0.0) return 0.0;
        return s * std::exp(log_gamma_pdf(u, k.nu1, k.beta1) + log_gamma_pdf(w, k.nu2, k.beta2));
    };
    const QuadResult q = integrate_adaptive(integrand, 0.0, 1.0, 1e-10, 0.0);
    if (!q.converged) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3e", q.error_estimate);
        throw budget_error(std::string("kernel_pdf_oracle: quadrature uncertified, "
                                       "achieved error estimate ") +
                           buf);
    }
    return q.value;
}

}  // namespace cirsum
