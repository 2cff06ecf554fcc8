#include "cirsum/truncation.hpp"

#include <cmath>

#include "cirsum/errors.hpp"
#include "cirsum/specfun.hpp"

namespace cirsum {

namespace {

void check_share(double eps_share) {
    if (!(eps_share > 0.0) || !(eps_share < 1.0))
        throw domain_error("plan_factor_truncation: eps share must lie in (0,1)");
}

// Exact mass below n_lo (a finite, short sum).
double lower_mass(double mean, unsigned n_lo, const std::vector<double>& pmf) {
    double s = 0.0;
    for (unsigned n = 0; n < n_lo; ++n) s += pmf[n];
    (void)mean;
    return s;
}

FactorTruncation finish(double mean, unsigned n_lo, unsigned n_hi,
                        const std::vector<double>& pmf) {
    FactorTruncation out;
    out.n_lo = n_lo;
    out.n_hi = n_hi;
    out.weights.assign(pmf.begin() + n_lo, pmf.begin() + n_hi + 1);
    out.dropped = lower_mass(mean, n_lo, pmf) + poisson_upper_tail(mean, n_hi);
    return out;
}

}  // namespace

FactorTruncation plan_factor_truncation(double mean, double eps_share, TruncMethod method) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw domain_error("plan_factor_truncation: mean must be nonnegative and finite");
    check_share(eps_share);

    if (mean == 0.0) {
        FactorTruncation out;
        out.n_lo = out.n_hi = 0;
        out.weights = {1.0};
        out.dropped = 0.0;
        return out;
    }

    switch (method) {
        case TruncMethod::tail_quantile: {
            const unsigned j = poisson_tail_quantile(mean, eps_share);
            return finish(mean, 0, j, poisson_weights(mean, j));
        }

        case TruncMethod::normal_approx: {
            // Quantile from the normal approximation, then verified against
            // the exact tail and pushed up until the budget certifies.
            unsigned j;
            if (eps_share > 1e-15) {
                const double z = normal_quantile(1.0 - eps_share);
                j = static_cast<unsigned>(
                    std::ceil(std::max(0.0, mean + z * std::sqrt(mean))));
            } else {
                j = poisson_tail_quantile(mean, eps_share);
            }
            const double log_eps = std::log(eps_share);
            while (log_poisson_upper_tail(mean, j) > log_eps) ++j;
            return finish(mean, 0, j, poisson_weights(mean, j));
        }

        case TruncMethod::weight_window: {
            // Symmetric growth around the modal index j* = floor(mean),
            // alternating up/down, until the uncovered mass certifies below
            // the budget.  The upper edge is capped at the tail-quantile cut
            // for a quarter budget; past the cap only the lower edge grows.
            const unsigned mode = static_cast<unsigned>(std::floor(mean));
            const unsigned cap = poisson_tail_quantile(mean, 0.25 * eps_share);
            unsigned hi = std::min(mode, cap);
            unsigned lo = hi;
            const std::vector<double> pmf = poisson_weights(mean, cap);

            auto uncovered = [&](unsigned l, unsigned h) {
                double low = 0.0;
                for (unsigned n = 0; n < l; ++n) low += pmf[n];
                return low + poisson_upper_tail(mean, h);
            };

            bool up_next = true;
            while (uncovered(lo, hi) > eps_share) {
                const bool can_up = hi < cap;
                const bool can_down = lo > 0;
                if (!can_up && !can_down)
                    throw budget_error(
                        "plan_factor_truncation: weight window cannot certify eps");
                if (up_next && can_up)
                    ++hi;
                else if (can_down)
                    --lo;
                else
                    ++hi;
                up_next = !up_next;
            }
            return finish(mean, lo, hi, pmf);
        }
    }
    throw domain_error("plan_factor_truncation: unknown method");
}

}  // namespace cirsum
