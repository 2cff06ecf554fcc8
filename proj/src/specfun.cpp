#include "cirsum/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cirsum/errors.hpp"

namespace cirsum {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kLnSqrt2Pi = 0.91893853320467274178;  // ln sqrt(2*pi)
constexpr double kTinyPositive = 4.9406564584124654e-324;

// zeta(k) - 1 for k = 2..35; drives the Taylor series of ln Gamma around its
// zeros at a = 1 and a = 2, where a Lanczos/Stirling evaluation would lose
// all relative accuracy to cancellation.
constexpr double kZetaMinus1[] = {
    0.644934066848226436,    0.202056903159594285,    0.0823232337111381915,
    0.0369277551433699263,   0.0173430619844491397,   0.00834927738192282684,
    0.00407735619794433938,  0.00200839282608221442,  0.000994575127818085337,
    0.000494188604119464559, 0.000246086553308048299, 0.000122713347578489147,
    0.0000612481350587048293, 0.0000305882363070204936, 0.0000152822594086518717,
    7.63719763789976227e-6,  3.81729326499983986e-6,  1.90821271655393893e-6,
    9.53962033872796113e-7,  4.76932986787806463e-7,  2.3845050272773299e-7,
    1.19219925965311073e-7,  5.96081890512594796e-8,  2.98035035146522802e-8,
    1.49015548283650412e-8,  7.45071178983542949e-9,  3.72533402478845705e-9,
    1.86265972351304901e-9,  9.31327432419668183e-10, 4.65662906503378407e-10,
    2.32831183367650549e-10, 1.16415501727005198e-10, 5.82077208790270089e-11,
    2.91038504449709969e-11,
};

// ln Gamma(1+t) for |t| <= 0.5 via
//   ln Gamma(1+t) = -ln(1+t) + t(1-gamma) + sum_{k>=2} (-1)^k (zeta(k)-1) t^k / k,
// which converges like (t/2)^k and is exact (to rounding) at t = 0.
double log_gamma_taylor_1p(double t) {
    double sum = 0.0;
    double tk = t;  // t^k, starting at k=1
    double sign = 1.0;
    for (std::size_t i = 0; i < sizeof(kZetaMinus1) / sizeof(double); ++i) {
        tk *= t;
        const double term = sign * kZetaMinus1[i] * tk / static_cast<double>(i + 2);
        sum += term;
        sign = -sign;
        if (std::fabs(term) < 1e-18 * (std::fabs(sum) + 1e-30)) break;
    }
    return -std::log1p(t) + t * (1.0 - kEulerGamma) + sum;
}

// Lanczos (g = 7, 9 coefficients), accurate to ~1e-14 relative for a > 2.5
// where ln Gamma is bounded away from zero.
double log_gamma_lanczos(double a) {
    static constexpr double kLanczos[] = {
        0.99999999999980993,   676.5203681218851,     -1259.1392167224028,
        771.32342877765313,    -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,  9.9843695780195716e-6, 1.5056327351493116e-7,
    };
    double acc = kLanczos[0];
    for (int i = 1; i < 9; ++i) acc += kLanczos[i] / (a - 1.0 + i);
    const double t = a + 6.5;  // a + g - 0.5
    return kLnSqrt2Pi + (a - 0.5) * std::log(t) - t + std::log(acc);
}

// a ln x - x - ln Gamma(a), the exponent of the incomplete-gamma prefactor
// x^a e^{-x} / Gamma(a).  Assembled so the Stirling-scale pieces cancel
// analytically: near x = a the naive three-term form loses ~a*eps absolute
// accuracy in the exponent, exactly where P and Q are both O(1).
double log_gamma_prefactor(double a, double x) {
    if (a >= 30.0 && std::fabs(x - a) < 0.5 * a) {
        const double delta = (x - a) / a;            // exact: x within [a/2, 3a/2]
        const double phi = std::log1p(delta) - delta;  // -delta^2/2 + ..., stable
        const double a2 = a * a;
        const double corr =  // ln Gamma(a) minus its Stirling main term
            (1.0 / 12.0 -
             (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * a2)) / a2) / a2) /
            a;
        return a * phi + 0.5 * std::log(a / (2.0 * M_PI)) - corr;
    }
    return -x + a * std::log(x) - log_gamma(a);
}

// log of the Poisson pmf at n for the given positive mean, via the same
// stabilized exponent (pmf(n) = mean^n e^{-mean} / n!).
double log_poisson_pmf(double mean, double n) {
    return log_gamma_prefactor(n + 1.0, mean) - std::log(mean);
}

}  // namespace

LogValue LogValue::from_value(double v) {
    if (v == 0.0) return zero();
    return {std::log(std::fabs(v)), v > 0.0 ? +1 : -1};
}

double LogValue::value() const {
    if (sign == 0) return 0.0;
    return sign * std::exp(log_magnitude);
}

double log_gamma(double a) {
    if (!(a > 0.0) || !std::isfinite(a))
        throw domain_error("log_gamma: argument must be positive and finite");
    if (a < 0.5) return log_gamma_taylor_1p(a) - std::log(a);  // Gamma(a) = Gamma(1+a)/a
    if (a <= 1.5) return log_gamma_taylor_1p(a - 1.0);
    if (a <= 2.5) return log_gamma_taylor_1p(a - 2.0) + std::log1p(a - 2.0);
    return log_gamma_lanczos(a);
}

namespace {

// Lower-series branch of P(a, x), valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 10000000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (del < sum * 1e-17)
            return sum * std::exp(log_gamma_prefactor(a, x));
    }
    throw budget_error("reg_lower_gamma: series did not converge");
}

// Continued-fraction branch (modified Lentz) for Q(a, x), x >= a + 1.
double gamma_q_contfrac(double a, double x) {
    constexpr double kFpMin = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / (b == 0.0 ? kFpMin : b);
    double h = d;
    for (int i = 1; i < 10000000; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16)
            return h * std::exp(log_gamma_prefactor(a, x));
    }
    throw budget_error("reg_upper_gamma: continued fraction did not converge");
}

void check_gamma_args(const char* who, double a, double x) {
    if (!(a > 0.0) || !std::isfinite(a))
        throw domain_error(std::string(who) + ": shape must be positive and finite");
    if (!(x >= 0.0) || !std::isfinite(x))
        throw domain_error(std::string(who) + ": x must be nonnegative and finite");
}

}  // namespace

double reg_lower_gamma(double a, double x) {
    check_gamma_args("reg_lower_gamma", a, x);
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return std::min(1.0, gamma_p_series(a, x));
    return std::max(0.0, 1.0 - gamma_q_contfrac(a, x));
}

double reg_upper_gamma(double a, double x) {
    check_gamma_args("reg_upper_gamma", a, x);
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return std::max(0.0, 1.0 - gamma_p_series(a, x));
    return std::min(1.0, gamma_q_contfrac(a, x));
}

LogValue kummer_1f1(double a, double b, double z) {
    if (!(b > 0.0) || !std::isfinite(b))
        throw domain_error("kummer_1f1: b must be positive and finite");
    if (!(a > 0.0) || !std::isfinite(a))
        throw domain_error("kummer_1f1: a must be positive and finite");
    if (!std::isfinite(z)) throw domain_error("kummer_1f1: z must be finite");
    if (z == 0.0) return LogValue::from_log(0.0);

    // For z < 0 the raw series alternates and cancels catastrophically.
    // Rewrite through 1F1(a;b;z) = e^z 1F1(b-a;b;-z) so every summed term is
    // nonnegative.  Requires b >= a, which holds at every call site here.
    double head = a, zz = z, log_offset = 0.0;
    if (z < 0.0) {
        if (b - a < 0.0)
            throw domain_error("kummer_1f1: z < 0 requires b >= a for the stable form");
        head = b - a;
        zz = -z;
        log_offset = z;
        if (head == 0.0) return LogValue::from_log(log_offset);  // series is exactly 1
    }

    double term = 1.0;
    double sum = 1.0;
    for (long k = 0; k < 1000000; ++k) {
        term *= (head + k) / (b + k) * zz / (k + 1.0);
        sum += term;
        if (term < 1e-16 * sum) return LogValue::from_log(log_offset + std::log(sum));
        if (sum > 1e250) {  // rescale: keep the running sum O(1), bank the log
            const double ls = std::log(sum);
            log_offset += ls;
            term /= sum;
            sum = 1.0;
        }
    }
    throw budget_error("kummer_1f1: series exceeded 1e6 terms");
}

double log_pochhammer(double v, unsigned k) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw domain_error("log_pochhammer: v must be positive and finite");
    if (k == 0) return 0.0;
    return log_gamma(v + static_cast<double>(k)) - log_gamma(v);
}

std::vector<double> poisson_weights(double mean, unsigned n_max) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw domain_error("poisson_weights: mean must be nonnegative and finite");
    std::vector<double> w(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (mean == 0.0) {
        w[0] = 1.0;
        return w;
    }
    for (unsigned n = 0; n <= n_max; ++n)
        w[n] = std::exp(log_poisson_pmf(mean, static_cast<double>(n)));
    return w;
}

namespace {

// ln of the bracket B(j) = 1 + sum_{i>=1} prod_{r=1..i} mean/(j+1+r), so that
// P(N > j) = pmf(j+1) * B(j).  Converges for every j (terms decay once the
// index passes the mean); O(sqrt(mean)) work near the mode.
double log_tail_bracket(double mean, unsigned j) {
    double term = 1.0;
    double bracket = 1.0;
    double m = static_cast<double>(j) + 2.0;
    for (long i = 0; i < 4000000; ++i) {
        term *= mean / m;
        bracket += term;
        m += 1.0;
        if (term < 1e-20 * bracket && m > mean) return std::log(bracket);
    }
    throw budget_error("poisson tail bracket did not converge");
}

}  // namespace

double log_poisson_upper_tail(double mean, unsigned j) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw domain_error("poisson tail: mean must be nonnegative and finite");
    if (mean == 0.0) return -std::numeric_limits<double>::infinity();
    return log_poisson_pmf(mean, static_cast<double>(j) + 1.0) + log_tail_bracket(mean, j);
}

double poisson_upper_tail(double mean, unsigned j) {
    const double lt = log_poisson_upper_tail(mean, j);
    if (lt == -std::numeric_limits<double>::infinity()) return 0.0;
    // Never round a positive tail to zero: the result is used as a certified
    // upper bound on dropped mass.
    return std::max(std::exp(lt), kTinyPositive);
}

unsigned poisson_tail_quantile(double mean, double eps) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw domain_error("poisson_tail_quantile: mean must be nonnegative and finite");
    if (!(eps > 0.0) || !(eps < 1.0))
        throw domain_error("poisson_tail_quantile: eps must lie in (0,1)");
    if (mean == 0.0) return 0;

    const double log_eps = std::log(eps);
    unsigned j;
    if (mean <= 1e4) {
        // Cumulative summation from 0 (compensated); exact in this range for
        // eps down to ~1e-10, after which the log-space tail walk takes over.
        const double cum_target = 1.0 - std::max(eps, 1e-10);
        double cum = 0.0, comp = 0.0;
        unsigned n = 0;
        for (;; ++n) {
            const double w = std::exp(log_poisson_pmf(mean, n));
            const double y = w - comp;
            const double t = cum + y;
            comp = (t - cum) - y;
            cum = t;
            if (cum >= cum_target) break;
            if (n > 200000) throw budget_error("poisson_tail_quantile: scan overflow");
        }
        j = n;
    } else {
        // Normal-approximation start (exactly the large-mean shortcut), then
        // verified against the exact tail below.
        const double z = (eps > 1e-15) ? normal_quantile(1.0 - eps)
                                       : std::sqrt(-2.0 * log_eps);  // Chernoff-style over-guess
        j = static_cast<unsigned>(std::ceil(mean + z * std::sqrt(mean)));
    }

    // Exact adjustment: smallest j with log P(N > j) <= log eps.
    while (log_poisson_upper_tail(mean, j) > log_eps) ++j;
    while (j > 0 && log_poisson_upper_tail(mean, j - 1) <= log_eps) --j;
    return j;
}

namespace {

// Acklam's rational approximation to Phi^{-1} on (0, 0.5]; |rel err| < 1.2e-9.
double acklam_half(double p) {
    static constexpr double A[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double B[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double C[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double D[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    if (p < 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
               ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q /
           (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
}

// One Halley step against Phi computed from erfc; valid while erfc stays in
// the normal double range (|x| <~ 25).
double halley_refine(double x, double p) {
    const double phi_x = 0.5 * std::erfc(-x * 0.70710678118654752440);
    const double e = phi_x - p;
    if (e == 0.0) return x;
    // u = e / phi'(x), computed in logs so the tails cannot overflow.
    const double log_u = std::log(std::fabs(e)) + kLnSqrt2Pi + 0.5 * x * x;
    if (log_u > 700.0) return x;  // refinement step would be garbage; keep Acklam
    const double u = (e > 0 ? 1.0 : -1.0) * std::exp(log_u);
    return x - u / (1.0 + 0.5 * x * u);
}

// Deep lower tail (x < -26): Newton iteration on ln Phi(x) = ln p using the
// asymptotic expansion Phi(x) ~ phi(x)/(-x) (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8).
double deep_tail_refine(double x, double log_p) {
    for (int it = 0; it < 4; ++it) {
        const double x2 = x * x;
        const double s = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) +
                         105.0 / (x2 * x2 * x2 * x2);
        const double log_phi_cap = -0.5 * x2 - kLnSqrt2Pi - std::log(-x) + std::log(s);
        x -= (log_phi_cap - log_p) * s / (-x);
    }
    return x;
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw domain_error("normal_quantile: p must lie strictly inside (0,1)");
    if (p == 0.5) return 0.0;
    if (p > 0.5) return -normal_quantile(1.0 - p);  // 1-p exact for p in (0.5,1)
    double x = acklam_half(p);
    if (x < -26.0) return deep_tail_refine(x, std::log(p));
    return halley_refine(x, p);
}

}  // namespace cirsum
