#include "cirsum/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "cirsum/errors.hpp"
#include "cirsum/kernel.hpp"
#include "cirsum/specfun.hpp"

namespace cirsum {

namespace {

struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

void check_policy(const TruncationPolicy& t) {
    if (!(t.eps > 0.0 && t.eps < 1.0))
        throw domain_error("truncation policy: eps must lie in (0,1)");
    if (!(t.factor1_share > 0.0 && t.factor1_share < 1.0))
        throw domain_error("truncation policy: factor1_share must lie in (0,1)");
}

struct WindowPair {
    FactorTruncation p1, p2;
};

WindowPair plan_windows(const SumModel& m, const TruncationPolicy& t) {
    check_policy(t);
    WindowPair w;
    w.p1 = plan_factor_truncation(0.5 * m.derived1.lambda, t.eps * t.factor1_share, t.method);
    w.p2 = plan_factor_truncation(0.5 * m.derived2.lambda, t.eps * (1.0 - t.factor1_share),
                                  t.method);
    return w;
}

void fill_window_terms(EvalResult& r, const WindowPair& w) {
    r.terms.n1_lo = w.p1.n_lo;
    r.terms.n1_hi = w.p1.n_hi;
    r.terms.n2_lo = w.p2.n_lo;
    r.terms.n2_hi = w.p2.n_hi;
}

double max_beta(const SumModel& m) { return std::max(m.derived1.beta, m.derived2.beta); }

void check_laplace_domain(const SumModel& m, double u) {
    if (!std::isfinite(u) || !(u > -1.0 / max_beta(m)))
        throw domain_error("laplace: u must exceed the pole at -1/max(beta)");
}

}  // namespace

SumModel make_sum_model(const CirFactor& f1, const CirFactor& f2, double dt) {
    validate_factor(f1, "1");
    validate_factor(f2, "2");
    SumModel m;
    m.factor1 = f1;
    m.factor2 = f2;
    m.dt = dt;
    m.derived1 = transition_params(f1, dt);
    m.derived2 = transition_params(f2, dt);
    return m;
}

EvalResult pdf(const SumModel& m, double s, const TruncationPolicy& t) {
    if (!(s > 0.0) || !std::isfinite(s))
        throw domain_error("pdf: s must be positive and finite");
    const WindowPair w = plan_windows(m, t);
    const double half_d1 = 0.5 * m.derived1.d, half_d2 = 0.5 * m.derived2.d;
    KahanSum acc;
    for (unsigned i = 0; i < w.p1.weights.size(); ++i) {
        const double nu1 = half_d1 + (w.p1.n_lo + i);
        for (unsigned j = 0; j < w.p2.weights.size(); ++j) {
            const double nu2 = half_d2 + (w.p2.n_lo + j);
            const KernelParams k =
                make_kernel_params(nu1, nu2, m.derived1.beta, m.derived2.beta);
            acc.add(w.p1.weights[i] * w.p2.weights[j] * kernel_pdf(k, s));
        }
    }
    EvalResult out;
    out.value = acc.s;
    // Every kernel cell — kept or dropped — is a convolution involving a
    // Gamma density of shape >= 1 (d >= 2 under Feller) on the larger scale,
    // so its sup is at most 1/max(beta): dropped mass converts to a density
    // bound through that factor.
    out.trunc_error_bound =
        rectangle_dropped_mass(w.p1.dropped, w.p2.dropped) / max_beta(m);
    if (out.value < 0.0) {
        if (-out.value > out.trunc_error_bound + 1e-12)
            throw std::logic_error("pdf: negative value beyond certified bound");
        out.value = 0.0;
    }
    fill_window_terms(out, w);
    return out;
}

EvalResult cdf(const SumModel& m, double s, const TruncationPolicy& t) {
    if (!(s >= 0.0) || !std::isfinite(s))
        throw domain_error("cdf: s must be nonnegative and finite");
    EvalResult out;
    if (s == 0.0) return out;  // every mixture cell has CDF 0 at the origin

    const WindowPair w = plan_windows(m, t);
    const double half_d1 = 0.5 * m.derived1.d, half_d2 = 0.5 * m.derived2.d;
    KahanSum acc, cell_bounds;
    unsigned k_deepest = 0;
    for (unsigned i = 0; i < w.p1.weights.size(); ++i) {
        const double nu1 = half_d1 + (w.p1.n_lo + i);
        for (unsigned j = 0; j < w.p2.weights.size(); ++j) {
            const double nu2 = half_d2 + (w.p2.n_lo + j);
            const KernelParams k =
                make_kernel_params(nu1, nu2, m.derived1.beta, m.derived2.beta);
            const EvalResult cell = kernel_cdf(k, s, t.eps);
            const double wv = w.p1.weights[i] * w.p2.weights[j];
            acc.add(wv * cell.value);
            cell_bounds.add(wv * cell.trunc_error_bound);
            k_deepest = std::max(k_deepest, cell.terms.k_terms);
        }
    }
    out.trunc_error_bound =
        rectangle_dropped_mass(w.p1.dropped, w.p2.dropped) + cell_bounds.s;
    double v = acc.s;
    if (v < 0.0 || v > 1.0) {
        const double excess = v < 0.0 ? -v : v - 1.0;
        // 1e-12 allows for summation rounding on top of the truncation bound
        if (excess > out.trunc_error_bound + 1e-12)
            throw std::logic_error("cdf: clamp magnitude beyond certified bound");
        v = std::min(1.0, std::max(0.0, v));
    }
    out.value = v;
    fill_window_terms(out, w);
    out.terms.k_terms = k_deepest;
    return out;
}

Moments moments(const SumModel& m) {
    Moments out;
    for (const TransitionParams* p : {&m.derived1, &m.derived2}) {
        const double ac = 0.5 * p->beta;  // a*c
        out.mean += ac * (p->d + p->lambda);
        out.variance += 2.0 * ac * ac * (p->d + 2.0 * p->lambda);
    }
    return out;
}

double laplace_closed(const SumModel& m, double u) {
    check_laplace_domain(m, u);
    double log_l = 0.0;
    for (const TransitionParams* p : {&m.derived1, &m.derived2}) {
        const double bu = p->beta * u;
        log_l += -0.5 * p->d * std::log1p(bu) - 0.5 * p->lambda * bu / (1.0 + bu);
    }
    return std::exp(log_l);
}

EvalResult laplace_series(const SumModel& m, double u, const TruncationPolicy& t) {
    check_laplace_domain(m, u);
    const WindowPair w = plan_windows(m, t);

    // The double sum factorizes: each factor contributes
    //   L_i = sum_n w_n (1 + beta_i u)^{-(d_i/2 + n)}.
    auto factor_sum = [&](const TransitionParams& p, const FactorTruncation& f) {
        const double log_base = std::log1p(p.beta * u);
        KahanSum acc;
        for (unsigned i = 0; i < f.weights.size(); ++i) {
            const double nu = 0.5 * p.d + (f.n_lo + i);
            acc.add(f.weights[i] * std::exp(-nu * log_base));
        }
        return acc.s;
    };
    // Certified bound on one factor's dropped terms.  For u >= 0 every
    // summand is <= 1 so the dropped Poisson mass itself bounds them.  For
    // u < 0 the summand grows like r^n with r = 1/(1+beta u) > 1; the dropped
    // upper tail is summed exactly through the exponential tilt
    //   sum_{n>J} w_n r^n = e^{mu(r-1)} P(Pois(mu r) > J),
    // and dropped lower terms (weight windows only) are bounded by their mass
    // times the largest omitted power.
    auto factor_bound = [&](const TransitionParams& p, const FactorTruncation& f) {
        if (u >= 0.0) return f.dropped;
        const double mu = 0.5 * p.lambda;
        if (mu == 0.0) return 0.0;  // single exact term, nothing dropped
        const double log_r = -std::log1p(p.beta * u);
        const double r = std::exp(log_r);
        double bound = std::exp(0.5 * p.d * log_r + mu * (r - 1.0) +
                                log_poisson_upper_tail(mu * r, f.n_hi));
        if (f.n_lo > 0) {
            double lower_mass = 0.0;
            for (double pw : poisson_weights(mu, f.n_lo - 1)) lower_mass += pw;
            bound += lower_mass * std::exp((0.5 * p.d + f.n_lo - 1.0) * log_r);
        }
        return bound;
    };

    const double l1 = factor_sum(m.derived1, w.p1);
    const double l2 = factor_sum(m.derived2, w.p2);
    const double b1 = factor_bound(m.derived1, w.p1);
    const double b2 = factor_bound(m.derived2, w.p2);

    EvalResult out;
    out.value = l1 * l2;
    out.trunc_error_bound = b1 * (std::fabs(l2) + b2) + b2 * std::fabs(l1);
    fill_window_terms(out, w);
    return out;
}

GaussianLimitStats gaussian_limit_stats(const SumModel& m) {
    GaussianLimitStats out;
    for (const CirFactor* f : {&m.factor1, &m.factor2}) {
        out.mean_approx += f->weight_a * (f->x0 + f->kappa * (f->theta - f->x0) * m.dt);
        out.var_approx += f->weight_a * f->weight_a * f->sigma * f->sigma * f->x0;
    }
    out.var_approx *= m.dt;
    return out;
}

GroupedEvaluator::GroupedEvaluator(const SumModel& m, const TruncationPolicy& t) {
    check_policy(t);
    base_shape_ = 0.5 * (m.derived1.d + m.derived2.d);

    if (m.derived1.beta == m.derived2.beta) {
        // Equal scales: the whole sum is one Poisson-Gamma mixture with the
        // noncentrality means combined, so no regrouping is needed.
        scale_ = m.derived1.beta;
        const double combined = 0.5 * (m.derived1.lambda + m.derived2.lambda);
        const FactorTruncation p = plan_factor_truncation(combined, t.eps, t.method);
        coef_.assign(p.n_lo + p.weights.size(), 0.0);
        for (unsigned i = 0; i < p.weights.size(); ++i) coef_[p.n_lo + i] = p.weights[i];
        cdf_bound_ = p.dropped;
        pdf_bound_ = p.dropped / scale_;
        return;
    }

    const bool f1_big = m.derived1.beta > m.derived2.beta;
    const TransitionParams& big = f1_big ? m.derived1 : m.derived2;
    const TransitionParams& small = f1_big ? m.derived2 : m.derived1;
    const double share_big = f1_big ? t.factor1_share : 1.0 - t.factor1_share;
    const FactorTruncation pb =
        plan_factor_truncation(0.5 * big.lambda, t.eps * share_big, t.method);
    const FactorTruncation ps =
        plan_factor_truncation(0.5 * small.lambda, t.eps * (1.0 - share_big), t.method);

    scale_ = small.beta;
    const double q = small.beta / big.beta;  // in (0,1)
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);

    // Re-expand the larger-scale factor on the common scale:
    //   Gamma(nu, beta_big) = sum_k q^nu (nu)_k / k! (1-q)^k Gamma(nu+k, beta_small),
    // folding the Poisson weight in as we go: B[n+k] += w_n * nb_k(nu_n).
    // Each n's k-sum stops once a geometric majorant of its remaining mass
    // certifies below an extra per-n budget; the stops are accumulated into
    // the evaluator's bounds.
    std::vector<double> big_coef;
    const double nb_budget = 0.1 * t.eps / static_cast<double>(pb.weights.size());
    double nb_dropped = 0.0;
    for (unsigned i = 0; i < pb.weights.size(); ++i) {
        const unsigned n = pb.n_lo + i;
        const double nu = 0.5 * big.d + n;
        const double wn = pb.weights[i];
        double log_nb = nu * log_q;
        for (unsigned k = 0;; ++k) {
            const unsigned j = n + k;
            if (big_coef.size() <= j) big_coef.resize(j + 1, 0.0);
            big_coef[j] += wn * ((log_nb > -745.0) ? std::exp(log_nb) : 0.0);

            const double log_next = log_nb + log_1mq + std::log((nu + k) / (k + 1.0));
            // ratio of consecutive terms beyond k+1 is at most rho; a valid
            // geometric tail only exists past the modal index, where rho < 1
            const double rho = (1.0 - q) * std::max(1.0, (nu + k + 1.0) / (k + 2.0));
            if (rho < 1.0) {
                const double tail = std::exp(log_next) / (1.0 - rho);
                if (tail <= nb_budget) {
                    nb_dropped += wn * tail;
                    break;
                }
            }
            log_nb = log_next;
            if (k == 500000)
                throw budget_error("grouped evaluator: regrouping series exceeded its term cap");
        }
    }

    coef_.assign(big_coef.size() + ps.n_lo + ps.weights.size() - 1, 0.0);
    for (unsigned j = 0; j < big_coef.size(); ++j) {
        if (big_coef[j] == 0.0) continue;
        for (unsigned i = 0; i < ps.weights.size(); ++i)
            coef_[j + ps.n_lo + i] += big_coef[j] * ps.weights[i];
    }

    const double rect = rectangle_dropped_mass(pb.dropped, ps.dropped);
    cdf_bound_ = rect + nb_dropped;
    pdf_bound_ = rect / big.beta + nb_dropped / scale_;
}

double GroupedEvaluator::pdf_at(double s) const {
    if (!(s > 0.0) || !std::isfinite(s))
        throw domain_error("grouped pdf: s must be positive and finite");
    const double x = s / scale_;
    const double log_x = std::log(x);
    double log_g =
        (base_shape_ - 1.0) * log_x - x - log_gamma(base_shape_) - std::log(scale_);
    KahanSum acc;
    double g = 0.0;
    bool materialized = false;
    for (std::size_t mm = 0; mm < coef_.size(); ++mm) {
        if (!materialized && log_g > -700.0) {
            g = std::exp(log_g);
            materialized = true;
        }
        if (materialized) {
            acc.add(coef_[mm] * g);
            g *= x / (base_shape_ + static_cast<double>(mm));
        } else {
            log_g += log_x - std::log(base_shape_ + static_cast<double>(mm));
        }
    }
    return std::max(0.0, acc.s);
}

double GroupedEvaluator::cdf_at(double s) const {
    if (!std::isfinite(s)) throw domain_error("grouped cdf: s must be finite");
    if (s <= 0.0) return 0.0;
    const double x = s / scale_;
    const double log_x = std::log(x);
    double p = reg_lower_gamma(base_shape_, x);
    double log_t = base_shape_ * log_x - x - log_gamma(base_shape_ + 1.0);
    KahanSum acc;
    double tt = 0.0;
    bool materialized = false;
    for (std::size_t mm = 0; mm < coef_.size(); ++mm) {
        if (p < 0.0) p = 0.0;
        acc.add(coef_[mm] * p);
        if (!materialized && log_t > -745.0) {
            tt = std::exp(log_t);
            materialized = true;
        }
        if (materialized) {
            p -= tt;
            tt *= x / (base_shape_ + static_cast<double>(mm) + 1.0);
        } else {
            log_t += log_x - std::log(base_shape_ + static_cast<double>(mm) + 1.0);
        }
    }
    return std::min(1.0, std::max(0.0, acc.s));
}

std::vector<double> GroupedEvaluator::pdf_many(const std::vector<double>& s) const {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = pdf_at(s[i]);
    return out;
}

std::vector<double> GroupedEvaluator::cdf_many(const std::vector<double>& s) const {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = cdf_at(s[i]);
    return out;
}

}  // namespace cirsum
