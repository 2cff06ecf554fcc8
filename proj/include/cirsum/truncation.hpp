#pragma once

#include <vector>

namespace cirsum {

// How the infinite Poisson mixture sums are cut.
//  - tail_quantile: keep [0, J] with J the exact Poisson tail quantile.
//  - normal_approx: J from the normal-approximation quantile formula, then
//    verified and adjusted against the exact tail.
//  - weight_window: expand symmetrically around the modal index until the
//    uncovered mass certifies below the budget.
enum class TruncMethod { tail_quantile, normal_approx, weight_window };

struct TruncationPolicy {
    TruncMethod method = TruncMethod::tail_quantile;
    double eps = 1e-10;             // total dropped-probability budget
    double factor1_share = 0.5;     // fraction of eps charged to factor 1 (rest to factor 2)
};

// Term ranges actually used by a truncated evaluation.
struct TermsUsed {
    unsigned n1_lo = 0, n1_hi = 0;
    unsigned n2_lo = 0, n2_hi = 0;
    unsigned k_terms = 0;  // inner CDF-series terms, when applicable
};

// A computed value together with a certified upper bound on the error
// contributed by every dropped series term.
struct EvalResult {
    double value = 0.0;
    double trunc_error_bound = 0.0;
    TermsUsed terms;
};

// One factor's truncated Poisson window [n_lo, n_hi] with its weights and an
// upper bound on the omitted mass (exact complementary summation, never an
// estimate).
struct FactorTruncation {
    unsigned n_lo = 0;
    unsigned n_hi = 0;
    std::vector<double> weights;  // weights[i] is the pmf at n_lo + i
    double dropped = 0.0;
};

// Plan a window for N ~ Poisson(mean) with dropped mass <= eps_share.
FactorTruncation plan_factor_truncation(double mean, double eps_share, TruncMethod method);

// Dropped mass when two independently truncated factors form a product grid:
// 1 - (1-d1)(1-d2) = d1 + d2 - d1*d2, evaluated without cancellation.
inline double rectangle_dropped_mass(double d1, double d2) { return d1 + d2 - d1 * d2; }

}  // namespace cirsum
