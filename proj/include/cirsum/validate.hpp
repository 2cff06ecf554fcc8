#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cirsum/mixture.hpp"

namespace cirsum {

// One Monte-Carlo-vs-analytic comparison run.  Everything except runtime_ms
// is a pure function of (parameters, seed, n_samples, n_bins); runtime_ms is
// wall-clock and therefore excluded from reproducibility comparisons.
struct ValidationReport {
    CirFactor f1, f2;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t n_samples = 0;
    unsigned n_bins = 0;
    double ise = 0.0;
    double ks_sup = 0.0;
    double mean_delta_sigmas = 0.0;  // (sample mean - model mean) / SE(mean)
    double var_delta_sigmas = 0.0;   // (sample var - model var) / SE(var)
    double runtime_ms = 0.0;
};

// Pinned CSV column order.
extern const char* const kValidationCsvHeader;
std::string to_csv_row(const ValidationReport& r);
ValidationReport from_csv_row(const std::string& line);

// n exact draws of S (two chi-square transition draws per sample).  Work is
// split over 16 fixed substreams (seeds from substream_seed) regardless of
// how many threads execute them, so the output depends only on (m, n, seed).
std::vector<double> simulate_sum(const SumModel& m, std::uint64_t n, std::uint64_t seed);

// Nearest-rank empirical 99.9th percentile: sorted[floor(0.999 * (n-1))].
double empirical_p999(const std::vector<double>& samples);

// Histogram-vs-density comparison on n_bins equal-width bins over
// [0, grid_hi]: fills ise and the moment-delta fields.  Requires n_bins >= 50
// and at least 100 nonzero bins (else domain_error: degenerate sample).
void density_comparison(const SumModel& m, const std::vector<double>& samples,
                        unsigned n_bins, double grid_hi, ValidationReport& r);

// Two-sided Kolmogorov-Smirnov sup distance between the sample ECDF and the
// analytic CDF, evaluated at every sample point.  The 1.63/sqrt(n) band
// interpretation is calibrated for n >= 10^4; the statistic itself is well
// defined for any nonempty sample.
void cdf_comparison(const SumModel& m, const std::vector<double>& samples,
                    ValidationReport& r);

struct OracleReport {
    double pdf_max_abs_err = 0.0;  // mixture pdf vs marginal-convolution quadrature
    double cdf_max_abs_err = 0.0;  // mixture cdf vs quadrature of mixture pdf
};

// Independent brute-force crosscheck on a grid of >= 6 interior points.
OracleReport oracle_crosscheck(const SumModel& m, const std::vector<double>& grid);

}  // namespace cirsum
