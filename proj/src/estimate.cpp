#include "cirsum/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

#include "cirsum/config.hpp"
#include "cirsum/errors.hpp"

namespace cirsum {

const char* const kFitParamNames[kFitParamCount] = {"kappa1", "theta1", "sigma1",
                                                    "kappa2", "theta2", "sigma2"};

namespace {

constexpr double kDensityFloor = 1e-300;

// Per-factor views into the 6-vector layout.
struct FactorSlots {
    unsigned kappa, theta, sigma;
};
constexpr FactorSlots kSlots[2] = {{kFitKappa1, kFitTheta1, kFitSigma1},
                                   {kFitKappa2, kFitTheta2, kFitSigma2}};

double slot_min(const FitSpec& s, unsigned i) {
    return s.free_mask[i] ? s.lower[i] : s.fixed[i];
}
double slot_max(const FitSpec& s, unsigned i) {
    return s.free_mask[i] ? s.upper[i] : s.fixed[i];
}

}  // namespace

FitSpec make_fit_spec(FitSpec draft) {
    if (draft.observations.empty())
        throw domain_error("fit spec: no observations");
    for (double s : draft.observations)
        if (!(s > 0.0) || !std::isfinite(s))
            throw domain_error("fit spec: observations must be positive and finite");
    if (!(draft.dt > 0.0) || !std::isfinite(draft.dt))
        throw domain_error("fit spec: dt must be positive and finite");

    for (unsigned i = 0; i < kFitParamCount; ++i) {
        if (draft.free_mask[i]) {
            if (!(draft.lower[i] > 0.0) || !(draft.upper[i] >= draft.lower[i]) ||
                !std::isfinite(draft.upper[i]))
                throw domain_error(std::string("fit spec: bad bounds for ") + kFitParamNames[i]);
        } else if (!(draft.fixed[i] > 0.0) || !std::isfinite(draft.fixed[i])) {
            throw domain_error(std::string("fit spec: bad fixed value for ") +
                               kFitParamNames[i]);
        }
    }

    // Feller over the whole box: the weakest point pairs the smallest
    // 2*kappa*theta with the largest sigma^2.  Shrink free sigma tops first.
    for (const FactorSlots& f : kSlots) {
        const double floor2kt = 2.0 * slot_min(draft, f.kappa) * slot_min(draft, f.theta);
        const double sigma_cap = std::sqrt(floor2kt);
        if (draft.free_mask[f.sigma]) {
            draft.upper[f.sigma] = std::min(draft.upper[f.sigma], sigma_cap);
            if (!(draft.lower[f.sigma] <= draft.upper[f.sigma]))
                throw domain_error(
                    std::string("fit spec: Feller empties the box for ") +
                    kFitParamNames[f.sigma]);
        } else if (slot_max(draft, f.sigma) > sigma_cap) {
            throw domain_error("fit spec: fixed parameters violate Feller at the box minimum");
        }
    }
    return draft;
}

SumModel model_at(const FitSpec& spec, const std::array<double, 6>& point) {
    auto value = [&](unsigned i) { return spec.free_mask[i] ? point[i] : spec.fixed[i]; };
    CirFactor f1{value(kFitKappa1), value(kFitTheta1), value(kFitSigma1), spec.x0_1, spec.a1};
    CirFactor f2{value(kFitKappa2), value(kFitTheta2), value(kFitSigma2), spec.x0_2, spec.a2};
    return make_sum_model(f1, f2, spec.dt);
}

NllDiagnostics neg_log_likelihood_diag(const FitSpec& spec, const std::array<double, 6>& point,
                                       const TruncationPolicy& t) {
    TruncationPolicy tt = t;
    tt.eps = std::min(t.eps, 1e-10);  // likelihood work always runs tight
    const SumModel m = model_at(spec, point);
    const GroupedEvaluator ge(m, tt);

    const std::vector<double>& obs = spec.observations;
    const std::size_t n = obs.size();

    constexpr unsigned kChunks = 16;
    struct Partial {
        double sum = 0.0, comp = 0.0;
        std::size_t floored = 0;
        std::size_t first = SIZE_MAX;
    };
    std::array<Partial, kChunks> parts;
    const std::size_t chunk = (n + kChunks - 1) / kChunks;

    auto work = [&](unsigned c) {
        Partial& p = parts[c];
        const std::size_t lo = c * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) {
            double v = ge.pdf_at(obs[i]);
            if (v < kDensityFloor) {
                v = kDensityFloor;
                ++p.floored;
                if (p.first == SIZE_MAX) p.first = i;
            }
            const double term = -std::log(v);
            const double y = term - p.comp;
            const double s = p.sum + y;
            p.comp = (s - p.sum) - y;
            p.sum = s;
        }
    };

    if (n >= 4096) {
        const unsigned hw = std::thread::hardware_concurrency();
        const unsigned workers = std::min(kChunks, hw == 0 ? 4u : hw);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (unsigned c = w; c < kChunks; c += workers) work(c);
            });
        for (std::thread& th : pool) th.join();
    } else {
        for (unsigned c = 0; c < kChunks; ++c) work(c);
    }

    NllDiagnostics out;
    for (const Partial& p : parts) {  // fixed combine order: deterministic
        out.nll += p.sum;
        out.floored_count += p.floored;
        if (p.first != SIZE_MAX && out.first_floored == SIZE_MAX) out.first_floored = p.first;
    }
    return out;
}

double neg_log_likelihood(const FitSpec& spec, const std::array<double, 6>& point,
                          const TruncationPolicy& t) {
    return neg_log_likelihood_diag(spec, point, t).nll;
}

namespace {

struct Objective {
    const FitSpec& spec;
    const TruncationPolicy& policy;
    const std::vector<unsigned>& free_idx;
    std::uint64_t evaluations = 0;

    // y holds the logs of the free parameters.
    double operator()(const std::vector<double>& y) {
        std::array<double, 6> point{};
        for (std::size_t j = 0; j < free_idx.size(); ++j)
            point[free_idx[j]] = std::exp(y[j]);
        ++evaluations;
        return neg_log_likelihood(spec, point, policy);
    }
};

double simplex_diameter(const std::vector<std::vector<double>>& verts) {
    double diam = 0.0;
    for (std::size_t j = 0; j < verts[0].size(); ++j) {
        double lo = verts[0][j], hi = verts[0][j];
        for (const auto& v : verts) {
            lo = std::min(lo, v[j]);
            hi = std::max(hi, v[j]);
        }
        diam = std::max(diam, hi - lo);
    }
    return diam;
}

}  // namespace

FitResult fit_mle(const FitSpec& spec, const TruncationPolicy& t, std::uint64_t budget) {
    if (budget < 100) throw domain_error("fit_mle: budget must be >= 100");

    std::vector<unsigned> free_idx;
    for (unsigned i = 0; i < kFitParamCount; ++i)
        if (spec.free_mask[i]) free_idx.push_back(i);

    FitResult best;
    best.point = spec.fixed;

    if (free_idx.empty()) {
        best.nll = neg_log_likelihood(spec, best.point, t);
        best.evaluations = 1;
        best.stop_reason = "no_free_parameters";
        return best;
    }

    const std::size_t k = free_idx.size();
    std::vector<double> llo(k), lhi(k);
    for (std::size_t j = 0; j < k; ++j) {
        llo[j] = std::log(spec.lower[free_idx[j]]);
        lhi[j] = std::log(spec.upper[free_idx[j]]);
    }
    auto project = [&](std::vector<double>& y) {
        for (std::size_t j = 0; j < k; ++j) y[j] = std::min(lhi[j], std::max(llo[j], y[j]));
    };

    Objective obj{spec, t, free_idx};
    best.nll = std::numeric_limits<double>::infinity();

    constexpr unsigned kStarts = 5;
    const std::uint64_t per_start = budget / kStarts;
    constexpr double kDiamTol = 1e-6;  // log-space = relative in the parameters

    for (unsigned start = 0; start < kStarts; ++start) {
        // Latin-hypercube-style start: each dimension visits all 5 levels
        // across the starts, with a dimension-dependent stride so starts do
        // not sit on a diagonal.
        std::vector<double> y0(k);
        for (std::size_t j = 0; j < k; ++j) {
            const unsigned level = (start * (1 + j % 4) + (2 * j + 1) % 5) % 5;
            const double frac = (level + 0.5) / 5.0;
            y0[j] = llo[j] + frac * (lhi[j] - llo[j]);
        }

        // Initial simplex around y0, nudged inward at the box edge.
        std::vector<std::vector<double>> verts(k + 1, y0);
        for (std::size_t j = 0; j < k; ++j) {
            double step = 0.05 * (lhi[j] - llo[j]);
            if (step == 0.0) step = 1e-8;
            if (y0[j] + step > lhi[j]) step = -step;
            verts[j + 1][j] += step;
        }

        const std::uint64_t start_cap = obj.evaluations + per_start;
        std::vector<double> fvals(k + 1);
        for (auto i = 0u; i <= k; ++i) fvals[i] = obj(verts[i]);

        std::string reason = "budget";
        while (obj.evaluations < start_cap && obj.evaluations < budget) {
            // Order: best first, worst last.
            std::vector<std::size_t> order(k + 1);
            for (std::size_t i = 0; i <= k; ++i) order[i] = i;
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
            {
                std::vector<std::vector<double>> v2(k + 1);
                std::vector<double> f2(k + 1);
                for (std::size_t i = 0; i <= k; ++i) {
                    v2[i] = verts[order[i]];
                    f2[i] = fvals[order[i]];
                }
                verts.swap(v2);
                fvals.swap(f2);
            }
            if (simplex_diameter(verts) < kDiamTol) {
                reason = "converged";
                break;
            }

            std::vector<double> centroid(k, 0.0);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) centroid[j] += verts[i][j] / k;

            auto blend = [&](double coef) {
                std::vector<double> y(k);
                for (std::size_t j = 0; j < k; ++j)
                    y[j] = centroid[j] + coef * (centroid[j] - verts[k][j]);
                project(y);
                return y;
            };

            const std::vector<double> refl = blend(1.0);
            const double f_refl = obj(refl);
            if (f_refl < fvals[0]) {
                const std::vector<double> expd = blend(2.0);
                const double f_expd = obj(expd);
                if (f_expd < f_refl) {
                    verts[k] = expd;
                    fvals[k] = f_expd;
                } else {
                    verts[k] = refl;
                    fvals[k] = f_refl;
                }
            } else if (f_refl < fvals[k - 1]) {
                verts[k] = refl;
                fvals[k] = f_refl;
            } else {
                const bool outside = f_refl < fvals[k];
                const std::vector<double> ctr = blend(outside ? 0.5 : -0.5);
                const double f_ctr = obj(ctr);
                if (f_ctr < std::min(f_refl, fvals[k])) {
                    verts[k] = ctr;
                    fvals[k] = f_ctr;
                } else {
                    // Shrink toward the best vertex.
                    for (std::size_t i = 1; i <= k; ++i) {
                        for (std::size_t j = 0; j < k; ++j)
                            verts[i][j] = verts[0][j] + 0.5 * (verts[i][j] - verts[0][j]);
                        fvals[i] = obj(verts[i]);
                        if (obj.evaluations >= start_cap || obj.evaluations >= budget) break;
                    }
                }
            }
        }

        // Candidate from this start.
        std::size_t ibest = 0;
        for (std::size_t i = 1; i <= k; ++i)
            if (fvals[i] < fvals[ibest]) ibest = i;
        if (fvals[ibest] < best.nll) {
            best.nll = fvals[ibest];
            best.point = spec.fixed;
            for (std::size_t j = 0; j < k; ++j)
                best.point[free_idx[j]] = std::exp(verts[ibest][j]);
            best.stop_reason = reason;
            best.final_diameter = simplex_diameter(verts);
        }
        if (obj.evaluations >= budget) break;
    }

    best.evaluations = obj.evaluations;
    return best;
}

std::vector<double> read_observations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("observations: cannot open '" + path + "'");
    std::vector<double> out;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t b = 0, e = line.size();
        while (b < e && (line[b] == ' ' || line[b] == '\t')) ++b;
        while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t')) --e;
        const std::string s = line.substr(b, e - b);
        if (s.empty() || s[0] == '#') continue;
        if (!header_seen) {
            if (s != "s")
                throw config_error(path + ":" + std::to_string(lineno) +
                                   ": expected header 's'");
            header_seen = true;
            continue;
        }
        out.push_back(parse_double(s, path + ":" + std::to_string(lineno)));
    }
    if (!header_seen) throw config_error(path + ": missing header 's'");
    return out;
}

}  // namespace cirsum
