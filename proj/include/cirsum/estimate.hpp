#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cirsum/mixture.hpp"

namespace cirsum {

// Order of the fittable rate/level/volatility parameters in every 6-vector
// used by this module.  Initial states, weights and dt are always known.
enum FitParam : unsigned {
    kFitKappa1 = 0,
    kFitTheta1,
    kFitSigma1,
    kFitKappa2,
    kFitTheta2,
    kFitSigma2,
};
constexpr unsigned kFitParamCount = 6;
extern const char* const kFitParamNames[kFitParamCount];

struct FitSpec {
    std::vector<double> observations;          // i.i.d. draws of S, all > 0
    std::array<bool, 6> free_mask{};           // true = optimizer may move it
    std::array<double, 6> lower{};             // box bounds for free parameters
    std::array<double, 6> upper{};
    std::array<double, 6> fixed{};             // values used for non-free parameters
    double x0_1 = 0.0, x0_2 = 0.0;
    double a1 = 1.0, a2 = 1.0;
    double dt = 0.0;
};

// Validates the draft (observations nonempty and > 0, bounds positive and
// ordered, known quantities valid) and shrinks each free sigma upper bound to
// sqrt(2 * kappa_min * theta_min) of its factor, so that EVERY point in the
// search box satisfies both Feller conditions.  Throws domain_error if the
// box becomes empty or a fixed combination violates Feller at the box
// minimum.
FitSpec make_fit_spec(FitSpec draft);

// Model at a concrete 6-vector: free entries are read from `point`,
// everything else comes from spec.fixed and the known quantities.
SumModel model_at(const FitSpec& spec, const std::array<double, 6>& point);

struct NllDiagnostics {
    double nll = 0.0;
    std::size_t floored_count = 0;         // observations clipped by the density floor
    std::size_t first_floored = SIZE_MAX;  // index of the first clipped observation
};

// -sum_i log max(pdf(obs_i), 1e-300), with the truncation eps tightened to
// min(policy eps, 1e-10).  Parallel over observations with fixed chunking
// (result independent of thread count).
NllDiagnostics neg_log_likelihood_diag(const FitSpec& spec, const std::array<double, 6>& point,
                                       const TruncationPolicy& t);
double neg_log_likelihood(const FitSpec& spec, const std::array<double, 6>& point,
                          const TruncationPolicy& t);

struct FitResult {
    std::array<double, 6> point{};  // full 6-vector, fixed entries echoed
    double nll = 0.0;
    std::uint64_t evaluations = 0;
    std::string stop_reason;        // "converged", "budget" or "no_free_parameters"
    double final_diameter = 0.0;    // log-space simplex diameter when stopping
};

// Derivative-free maximum likelihood inside the box: Nelder-Mead in the log
// of each free parameter (positivity for free), candidates projected onto the
// box, restarted from 5 deterministic Latin-hypercube-style points sharing
// one evaluation budget.  budget >= 100.
FitResult fit_mle(const FitSpec& spec, const TruncationPolicy& t, std::uint64_t budget);

// One-column CSV with header "s"; '#' comment lines and blank lines skipped.
std::vector<double> read_observations_csv(const std::string& path);

}  // namespace cirsum
