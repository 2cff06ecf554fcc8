#include "cirsum/validate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cirsum/config.hpp"
#include "cirsum/errors.hpp"
#include "cirsum/quadrature.hpp"
#include "cirsum/rng.hpp"

namespace cirsum {

const char* const kValidationCsvHeader =
    "kappa1,theta1,sigma1,x01,a1,kappa2,theta2,sigma2,x02,a2,dt,seed,"
    "n_samples,n_bins,ise,ks_sup,mean_delta_sigmas,var_delta_sigmas,runtime_ms";

std::string to_csv_row(const ValidationReport& r) {
    std::string out;
    auto add = [&](const std::string& field) {
        if (!out.empty()) out += ',';
        out += field;
    };
    for (const CirFactor* f : {&r.f1, &r.f2}) {
        add(fmt_double(f->kappa));
        add(fmt_double(f->theta));
        add(fmt_double(f->sigma));
        add(fmt_double(f->x0));
        add(fmt_double(f->weight_a));
    }
    add(fmt_double(r.dt));
    add(std::to_string(r.seed));
    add(std::to_string(r.n_samples));
    add(std::to_string(r.n_bins));
    add(fmt_double(r.ise));
    add(fmt_double(r.ks_sup));
    add(fmt_double(r.mean_delta_sigmas));
    add(fmt_double(r.var_delta_sigmas));
    add(fmt_double(r.runtime_ms));
    return out;
}

ValidationReport from_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    if (fields.size() != 19)
        throw config_error("validation row: expected 19 fields, got " +
                           std::to_string(fields.size()));
    auto fd = [&](int i, const char* name) { return parse_double(fields[i], name); };
    ValidationReport r;
    r.f1.kappa = fd(0, "kappa1");
    r.f1.theta = fd(1, "theta1");
    r.f1.sigma = fd(2, "sigma1");
    r.f1.x0 = fd(3, "x01");
    r.f1.weight_a = fd(4, "a1");
    r.f2.kappa = fd(5, "kappa2");
    r.f2.theta = fd(6, "theta2");
    r.f2.sigma = fd(7, "sigma2");
    r.f2.x0 = fd(8, "x02");
    r.f2.weight_a = fd(9, "a2");
    r.dt = fd(10, "dt");
    r.seed = parse_u64(fields[11], "seed");
    r.n_samples = parse_u64(fields[12], "n_samples");
    r.n_bins = static_cast<unsigned>(parse_u64(fields[13], "n_bins"));
    r.ise = fd(14, "ise");
    r.ks_sup = fd(15, "ks_sup");
    r.mean_delta_sigmas = fd(16, "mean_delta_sigmas");
    r.var_delta_sigmas = fd(17, "var_delta_sigmas");
    r.runtime_ms = fd(18, "runtime_ms");
    return r;
}

namespace {

constexpr unsigned kShards = 16;

unsigned worker_count() {
    const unsigned hw = std::thread::hardware_concurrency();
    return std::min(kShards, hw == 0 ? 4u : hw);
}

// Run fn(shard_index) for every shard on a small thread pool.  Shard work is
// pre-assigned (round-robin), so scheduling never affects results.
template <typename Fn>
void run_sharded(Fn&& fn) {
    const unsigned workers = worker_count();
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (unsigned shard = w; shard < kShards; shard += workers) fn(shard);
        });
    for (std::thread& t : pool) t.join();
}

const TruncationPolicy kReportPolicy{TruncMethod::tail_quantile, 1e-10, 0.5};

}  // namespace

std::vector<double> simulate_sum(const SumModel& m, std::uint64_t n, std::uint64_t seed) {
    if (n < 1) throw domain_error("simulate_sum: n must be >= 1");
    std::vector<double> out(n);
    // Fixed per-shard sample counts: shard i draws base + 1 extra if i < rem.
    const std::uint64_t base = n / kShards;
    const std::uint64_t rem = n % kShards;
    run_sharded([&](unsigned shard) {
        std::uint64_t offset = shard * base + std::min<std::uint64_t>(shard, rem);
        std::uint64_t count = base + (shard < rem ? 1 : 0);
        Rng rng(substream_seed(seed, shard));
        for (std::uint64_t i = 0; i < count; ++i)
            out[offset + i] =
                sample_transition(m.derived1, rng) + sample_transition(m.derived2, rng);
    });
    return out;
}

double empirical_p999(const std::vector<double>& samples) {
    if (samples.empty()) throw domain_error("empirical_p999: empty sample set");
    std::vector<double> copy = samples;
    const std::size_t idx =
        static_cast<std::size_t>(std::floor(0.999 * static_cast<double>(copy.size() - 1)));
    std::nth_element(copy.begin(), copy.begin() + idx, copy.end());
    return copy[idx];
}

void density_comparison(const SumModel& m, const std::vector<double>& samples,
                        unsigned n_bins, double grid_hi, ValidationReport& r) {
    if (n_bins < 50) throw domain_error("density_comparison: n_bins must be >= 50");
    if (!(grid_hi > 0.0) || !std::isfinite(grid_hi))
        throw domain_error("density_comparison: grid upper edge must be positive");
    if (samples.empty()) throw domain_error("density_comparison: empty sample set");

    const double n = static_cast<double>(samples.size());
    const double width = grid_hi / n_bins;
    std::vector<std::uint64_t> counts(n_bins, 0);
    for (double s : samples) {
        if (s < 0.0 || s > grid_hi) continue;
        unsigned b = static_cast<unsigned>(s / width);
        if (b >= n_bins) b = n_bins - 1;  // s == grid_hi lands in the last bin
        ++counts[b];
    }
    unsigned nonzero = 0;
    for (std::uint64_t c : counts)
        if (c > 0) ++nonzero;
    if (nonzero < 100)
        throw domain_error("density_comparison: degenerate sample, fewer than 100 nonzero bins");

    const GroupedEvaluator ge(m, kReportPolicy);
    double ise = 0.0;
    for (unsigned b = 0; b < n_bins; ++b) {
        const double mid = (b + 0.5) * width;
        const double diff = static_cast<double>(counts[b]) / (n * width) - ge.pdf_at(mid);
        ise += diff * diff * width;
    }

    // Sample-moment deltas in standard-error units against the closed-form
    // model moments.
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double s : samples) {
        const double d = s - mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const double var = m2 / (n - 1.0);
    m4 /= n;
    const Moments mom = moments(m);
    const double se_mean = std::sqrt(var / n);
    const double se_var = std::sqrt(std::max(0.0, m4 - var * var) / n);

    r.f1 = m.factor1;
    r.f2 = m.factor2;
    r.dt = m.dt;
    r.n_samples = samples.size();
    r.n_bins = n_bins;
    r.ise = ise;
    r.mean_delta_sigmas = (mean - mom.mean) / se_mean;
    r.var_delta_sigmas = (var - mom.variance) / se_var;
}

void cdf_comparison(const SumModel& m, const std::vector<double>& samples,
                    ValidationReport& r) {
    // The 1.63/sqrt(n) band interpretation is calibrated for n >= 1e4, but the
    // statistic itself is well defined for any sample size.
    if (samples.empty()) throw domain_error("cdf_comparison: empty sample set");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());

    const GroupedEvaluator ge(m, kReportPolicy);
    const std::size_t n = sorted.size();
    std::vector<double> analytic(n);
    {
        // Chunked parallel evaluation; chunk boundaries are fixed, so the
        // result is independent of scheduling.
        const std::size_t chunk = (n + kShards - 1) / kShards;
        run_sharded([&](unsigned shard) {
            const std::size_t lo = shard * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            for (std::size_t i = lo; i < hi; ++i) analytic[i] = ge.cdf_at(sorted[i]);
        });
    }

    double ks = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        ks = std::max(ks, std::max(analytic[i] - lo, hi - analytic[i]));
    }

    r.f1 = m.factor1;
    r.f2 = m.factor2;
    r.dt = m.dt;
    if (r.n_samples == 0) r.n_samples = n;
    r.ks_sup = ks;
}

OracleReport oracle_crosscheck(const SumModel& m, const std::vector<double>& grid) {
    if (grid.size() < 6)
        throw domain_error("oracle_crosscheck: needs at least 6 interior grid points");
    const TruncationPolicy tight{TruncMethod::tail_quantile, 1e-12, 0.5};
    OracleReport out;
    for (double s : grid) {
        if (!(s > 0.0) || !std::isfinite(s))
            throw domain_error("oracle_crosscheck: grid points must be positive");

        // Brute-force convolution of the two marginal transition densities,
        // u = s*t substitution so the endpoints are never sampled.
        auto conv = [&](double t) {
            if (t <= 0.0 || t >= 1.0) return 0.0;
            return s * single_factor_pdf(m.derived1, s * t, tight).value *
                   single_factor_pdf(m.derived2, s * (1.0 - t), tight).value;
        };
        const QuadResult qpdf = integrate_adaptive(conv, 0.0, 1.0, 1e-9, 0.0);
        if (!qpdf.converged)
            throw budget_error("oracle_crosscheck: pdf convolution quadrature uncertified");
        out.pdf_max_abs_err =
            std::max(out.pdf_max_abs_err, std::fabs(qpdf.value - pdf(m, s, tight).value));

        // CDF against quadrature of the mixture pdf itself.
        auto dens = [&](double v) {
            if (v <= 0.0) return 0.0;
            return pdf(m, v, tight).value;
        };
        const QuadResult qcdf = integrate_adaptive(dens, 0.0, s, 1e-9, 0.0);
        if (!qcdf.converged)
            throw budget_error("oracle_crosscheck: cdf quadrature uncertified");
        out.cdf_max_abs_err =
            std::max(out.cdf_max_abs_err, std::fabs(qcdf.value - cdf(m, s, tight).value));
    }
    return out;
}

}  // namespace cirsum
