// cirsum: tabulate, simulate, validate and fit the exact law of a weighted
// sum of two independent square-root-diffusion transitions.
#include <CLI11.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cirsum/config.hpp"
#include "cirsum/errors.hpp"
#include "cirsum/estimate.hpp"
#include "cirsum/mixture.hpp"
#include "cirsum/validate.hpp"

namespace {

using namespace cirsum;

struct GridSpec {
    bool auto_grid = true;
    double min = 0.0, max = 0.0;
    unsigned count = 200;
    std::string raw = "auto:200";
};

struct RunConfig {
    CirFactor f1, f2;
    double dt = 0.0;
    TruncationPolicy policy;
    std::string trunc_name = "tail";
    std::uint64_t seed = 1;
    std::uint64_t n_samples = 1000000;
    unsigned n_bins = 200;
    GridSpec grid;
    std::string out_path;
    double analytic_sigma1_scale = 1.0;
    // fit block
    std::string fit_data;
    std::string fit_free;
    std::uint64_t fit_budget = 2000;
    std::array<double, 6> fit_lo{}, fit_hi{};
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    g.raw = text;
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() == 2 && parts[0] == "auto") {
        g.auto_grid = true;
        g.count = static_cast<unsigned>(parse_u64(parts[1], "grid COUNT"));
    } else if (parts.size() == 3) {
        g.auto_grid = false;
        g.min = parse_double(parts[0], "grid MIN");
        g.max = parse_double(parts[1], "grid MAX");
        g.count = static_cast<unsigned>(parse_u64(parts[2], "grid COUNT"));
        if (!(g.min >= 0.0) || !(g.max > g.min))
            throw config_error("grid: need 0 <= MIN < MAX");
    } else {
        throw config_error("grid: expected MIN:MAX:COUNT or auto:COUNT, got '" + text + "'");
    }
    if (g.count < 2) throw config_error("grid: COUNT must be >= 2");
    return g;
}

TruncMethod parse_trunc(const std::string& name) {
    if (name == "tail") return TruncMethod::tail_quantile;
    if (name == "normal") return TruncMethod::normal_approx;
    if (name == "window") return TruncMethod::weight_window;
    throw config_error("trunc: expected tail|normal|window, got '" + name + "'");
}

CirFactor resolve_factor(const KeyValueConfig& kv, const std::string& prefix) {
    CirFactor f;
    f.kappa = kv.get_double(prefix + ".kappa");
    f.theta = kv.get_double(prefix + ".theta");
    f.sigma = kv.get_double(prefix + ".sigma");
    f.x0 = kv.get_double(prefix + ".x0");
    f.weight_a = kv.get_double_or(prefix + ".a", 1.0);
    return f;
}

RunConfig resolve(const KeyValueConfig& kv) {
    RunConfig rc;
    rc.f1 = resolve_factor(kv, "f1");
    rc.f2 = resolve_factor(kv, "f2");
    rc.dt = kv.get_double("dt");
    rc.policy.eps = kv.get_double_or("eps", 1e-10);
    rc.trunc_name = kv.get_string_or("trunc", "tail");
    rc.policy.method = parse_trunc(rc.trunc_name);
    rc.seed = kv.get_u64_or("seed", 1);
    rc.n_samples = kv.get_u64_or("n_samples", 1000000);
    rc.n_bins = static_cast<unsigned>(kv.get_u64_or("n_bins", 200));
    rc.grid = parse_grid(kv.get_string_or("grid", "auto:200"));
    rc.out_path = kv.get_string_or("out", "");
    rc.analytic_sigma1_scale = kv.get_double_or("validate.analytic_sigma1_scale", 1.0);
    rc.fit_data = kv.get_string_or("fit.data", "");
    rc.fit_free = kv.get_string_or("fit.free", "");
    rc.fit_budget = kv.get_u64_or("fit.budget", 2000);
    for (unsigned i = 0; i < kFitParamCount; ++i) {
        const std::string lo_key = std::string("fit.lo.") + kFitParamNames[i];
        const std::string hi_key = std::string("fit.hi.") + kFitParamNames[i];
        rc.fit_lo[i] = kv.get_double_or(lo_key, 0.0);
        rc.fit_hi[i] = kv.get_double_or(hi_key, 0.0);
    }
    return rc;
}

void emit_echo(std::ostream& os, const std::string& command, const RunConfig& rc) {
    auto kv = [&os](const std::string& k, const std::string& v) {
        os << "# " << k << "=" << v << "\n";
    };
    kv("command", command);
    const std::pair<const char*, const CirFactor*> facts[2] = {{"f1", &rc.f1}, {"f2", &rc.f2}};
    for (const auto& [name, f] : facts) {
        kv(std::string(name) + ".kappa", fmt_double(f->kappa));
        kv(std::string(name) + ".theta", fmt_double(f->theta));
        kv(std::string(name) + ".sigma", fmt_double(f->sigma));
        kv(std::string(name) + ".x0", fmt_double(f->x0));
        kv(std::string(name) + ".a", fmt_double(f->weight_a));
    }
    kv("dt", fmt_double(rc.dt));
    kv("trunc", rc.trunc_name);
    kv("eps", fmt_double(rc.policy.eps));
    kv("seed", std::to_string(rc.seed));
    kv("n_samples", std::to_string(rc.n_samples));
    kv("n_bins", std::to_string(rc.n_bins));
    kv("grid", rc.grid.raw);
    if (command == "validate")
        kv("validate.analytic_sigma1_scale", fmt_double(rc.analytic_sigma1_scale));
    if (command == "fit") {
        kv("fit.data", rc.fit_data);
        kv("fit.free", rc.fit_free);
        kv("fit.budget", std::to_string(rc.fit_budget));
    }
}

template <typename Fn>
int with_output(const RunConfig& rc, Fn&& fn) {
    if (rc.out_path.empty()) return fn(std::cout);
    std::ofstream f(rc.out_path);
    if (!f) throw config_error("out: cannot open '" + rc.out_path + "' for writing");
    return fn(f);
}

struct ResolvedGrid {
    double min, max;
    unsigned count;
};

ResolvedGrid resolve_grid(const RunConfig& rc, const SumModel& m) {
    if (!rc.grid.auto_grid) return {rc.grid.min, rc.grid.max, rc.grid.count};
    const Moments mom = moments(m);
    return {0.0, mom.mean + 10.0 * std::sqrt(mom.variance), rc.grid.count};
}

int run_pdf(const RunConfig& rc) {
    const SumModel m = make_sum_model(rc.f1, rc.f2, rc.dt);
    const ResolvedGrid g = resolve_grid(rc, m);
    return with_output(rc, [&](std::ostream& os) {
        emit_echo(os, "pdf", rc);
        os << "# grid_resolved=" << fmt_double(g.min) << ":" << fmt_double(g.max) << ":"
           << g.count << "\n";
        os << "s,value,trunc_error_bound\n";
        // The density bound does not depend on s; reuse one positive
        // evaluation's bound for the s=0 row (where the density itself is 0
        // because every component shape exceeds 1).
        double zero_bound = -1.0;
        for (unsigned i = 0; i < g.count; ++i) {
            const double s = g.min + (g.max - g.min) * i / (g.count - 1.0);
            if (s == 0.0) {
                if (zero_bound < 0.0) {
                    const double s1 = g.min + (g.max - g.min) / (g.count - 1.0);
                    zero_bound = pdf(m, s1, rc.policy).trunc_error_bound;
                }
                os << fmt_double(s) << ",0," << fmt_double(zero_bound) << "\n";
                continue;
            }
            const EvalResult r = pdf(m, s, rc.policy);
            os << fmt_double(s) << "," << fmt_double(r.value) << ","
               << fmt_double(r.trunc_error_bound) << "\n";
        }
        return 0;
    });
}

int run_cdf(const RunConfig& rc) {
    const SumModel m = make_sum_model(rc.f1, rc.f2, rc.dt);
    const ResolvedGrid g = resolve_grid(rc, m);
    return with_output(rc, [&](std::ostream& os) {
        emit_echo(os, "cdf", rc);
        os << "# grid_resolved=" << fmt_double(g.min) << ":" << fmt_double(g.max) << ":"
           << g.count << "\n";
        os << "s,value,trunc_error_bound\n";
        for (unsigned i = 0; i < g.count; ++i) {
            const double s = g.min + (g.max - g.min) * i / (g.count - 1.0);
            const EvalResult r = cdf(m, s, rc.policy);
            os << fmt_double(s) << "," << fmt_double(r.value) << ","
               << fmt_double(r.trunc_error_bound) << "\n";
        }
        return 0;
    });
}

int run_moments(const RunConfig& rc) {
    const SumModel m = make_sum_model(rc.f1, rc.f2, rc.dt);
    const Moments mom = moments(m);
    return with_output(rc, [&](std::ostream& os) {
        emit_echo(os, "moments", rc);
        os << "mean=" << fmt_double(mom.mean) << "\n";
        os << "variance=" << fmt_double(mom.variance) << "\n";
        return 0;
    });
}

int run_simulate(const RunConfig& rc) {
    const SumModel m = make_sum_model(rc.f1, rc.f2, rc.dt);
    if (rc.n_samples < 1) throw config_error("n_samples: must be >= 1");
    const std::vector<double> draws = simulate_sum(m, rc.n_samples, rc.seed);
    return with_output(rc, [&](std::ostream& os) {
        emit_echo(os, "simulate", rc);
        os << "s\n";
        for (double d : draws) os << fmt_double(d) << "\n";
        return 0;
    });
}

int run_validate(const RunConfig& rc) {
    const SumModel m_true = make_sum_model(rc.f1, rc.f2, rc.dt);
    CirFactor f1a = rc.f1;
    f1a.sigma *= rc.analytic_sigma1_scale;  // negative-control corruption knob
    const SumModel m_analytic = make_sum_model(f1a, rc.f2, rc.dt);

    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> samples = simulate_sum(m_true, rc.n_samples, rc.seed);

    ValidationReport rep;
    rep.seed = rc.seed;
    density_comparison(m_analytic, samples, rc.n_bins, empirical_p999(samples), rep);
    cdf_comparison(m_analytic, samples, rep);

    const Moments mom = moments(m_analytic);
    const double sd = std::sqrt(mom.variance);
    std::vector<double> grid;
    for (double k : {-1.5, -0.75, 0.0, 0.75, 1.5, 3.0}) {
        double p = mom.mean + k * sd;
        if (p <= 0.0) p = mom.mean * 0.02 * static_cast<double>(grid.size() + 1);
        grid.push_back(p);
    }
    const OracleReport orep = oracle_crosscheck(m_analytic, grid);
    rep.runtime_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();

    const TruncationPolicy report_policy{TruncMethod::tail_quantile, 1e-10, 0.5};
    const double ks_band =
        1.63 / std::sqrt(static_cast<double>(samples.size())) +
        GroupedEvaluator(m_analytic, report_policy).cdf_error_bound();

    struct Criterion {
        const char* name;
        double value, threshold;
        bool pass;
    };
    auto le = [](double v, double thr) { return v <= thr; };
    const Criterion criteria[] = {
        {"ISE", rep.ise, 1e-4, rep.ise < 1e-4},
        {"KS", rep.ks_sup, ks_band, le(rep.ks_sup, ks_band)},
        {"MEAN", std::fabs(rep.mean_delta_sigmas), 4.0, le(std::fabs(rep.mean_delta_sigmas), 4.0)},
        {"VAR", std::fabs(rep.var_delta_sigmas), 4.0, le(std::fabs(rep.var_delta_sigmas), 4.0)},
        {"ORACLE_PDF", orep.pdf_max_abs_err, 1e-8, le(orep.pdf_max_abs_err, 1e-8)},
        {"ORACLE_CDF", orep.cdf_max_abs_err, 1e-8, le(orep.cdf_max_abs_err, 1e-8)},
    };
    bool all_pass = true;
    std::ostringstream lines;
    for (const Criterion& c : criteria) {
        all_pass = all_pass && c.pass;
        lines << c.name << (c.pass ? " PASS" : " FAIL") << " value=" << fmt_double(c.value)
              << " threshold=" << fmt_double(c.threshold) << "\n";
    }

    with_output(rc, [&](std::ostream& os) {
        emit_echo(os, "validate", rc);
        os << kValidationCsvHeader << "\n" << to_csv_row(rep) << "\n";
        std::istringstream in(lines.str());
        std::string line;
        while (std::getline(in, line)) os << "# " << line << "\n";
        return 0;
    });
    if (!rc.out_path.empty()) std::cout << lines.str();
    return all_pass ? 0 : 1;
}

int run_fit(const RunConfig& rc) {
    if (rc.fit_data.empty()) throw config_error("fit.data: required (observations CSV path)");
    FitSpec draft;
    draft.observations = read_observations_csv(rc.fit_data);
    draft.dt = rc.dt;
    draft.x0_1 = rc.f1.x0;
    draft.x0_2 = rc.f2.x0;
    draft.a1 = rc.f1.weight_a;
    draft.a2 = rc.f2.weight_a;
    draft.fixed = {rc.f1.kappa, rc.f1.theta, rc.f1.sigma,
                   rc.f2.kappa, rc.f2.theta, rc.f2.sigma};

    // Parse the free-parameter list.
    std::string cur;
    std::vector<std::string> names;
    for (char c : rc.fit_free + ",") {
        if (c == ',') {
            if (!cur.empty()) names.push_back(cur);
            cur.clear();
        } else if (c != ' ') {
            cur += c;
        }
    }
    for (const std::string& n : names) {
        int idx = -1;
        for (unsigned i = 0; i < kFitParamCount; ++i)
            if (n == kFitParamNames[i]) idx = static_cast<int>(i);
        if (idx < 0) throw config_error("fit.free: unknown parameter '" + n + "'");
        draft.free_mask[idx] = true;
        if (!(rc.fit_lo[idx] > 0.0) || !(rc.fit_hi[idx] > 0.0))
            throw config_error("fit bounds: fit.lo." + n + " and fit.hi." + n +
                               " must be set and positive");
        draft.lower[idx] = rc.fit_lo[idx];
        draft.upper[idx] = rc.fit_hi[idx];
    }

    const FitSpec spec = make_fit_spec(std::move(draft));
    const FitResult res = fit_mle(spec, rc.policy, rc.fit_budget);

    return with_output(rc, [&](std::ostream& os) {
        emit_echo(os, "fit", rc);
        for (unsigned i = 0; i < kFitParamCount; ++i)
            os << kFitParamNames[i] << "=" << fmt_double(res.point[i]) << "\n";
        os << "nll=" << fmt_double(res.nll) << "\n";
        os << "evaluations=" << res.evaluations << "\n";
        os << "stop_reason=" << res.stop_reason << "\n";
        os << "final_diameter=" << fmt_double(res.final_diameter) << "\n";
        os << "# diagnostics\n";
        os << "kappa1,theta1,sigma1,kappa2,theta2,sigma2,nll,evaluations,stop_reason,"
              "final_diameter\n";
        for (unsigned i = 0; i < kFitParamCount; ++i) os << fmt_double(res.point[i]) << ",";
        os << fmt_double(res.nll) << "," << res.evaluations << "," << res.stop_reason << ","
           << fmt_double(res.final_diameter) << "\n";
        return 0;
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "cirsum: exact density, CDF, moments, Laplace transform, simulation and "
        "likelihood fitting for a weighted sum of two independent square-root "
        "diffusion transitions.\n"
        "Configuration comes from a flat key=value file (--config) and/or flags; "
        "flags override the file. All outputs are deterministic given the "
        "resolved configuration."};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value configuration file [path]");
        // Captures cmd by value: the returned lambda outlives this frame when the
        // caller keeps it around to register extra subcommand-specific options.
        auto opt = [cmd, &overrides](const std::string& flag, const std::string& key,
                                     const std::string& desc) {
            cmd->add_option_function<std::string>(
                flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
                desc);
        };
        opt("--f1.kappa", "f1.kappa", "factor 1 mean-reversion rate [1/time]");
        opt("--f1.theta", "f1.theta", "factor 1 long-run level [state units]");
        opt("--f1.sigma", "f1.sigma",
            "factor 1 volatility [state units^(1/2)/time^(1/2)]");
        opt("--f1.x0", "f1.x0", "factor 1 state at the step start [state units]");
        opt("--f1.a", "f1.a", "factor 1 weight in the sum [dimensionless, default 1]");
        opt("--f2.kappa", "f2.kappa", "factor 2 mean-reversion rate [1/time]");
        opt("--f2.theta", "f2.theta", "factor 2 long-run level [state units]");
        opt("--f2.sigma", "f2.sigma",
            "factor 2 volatility [state units^(1/2)/time^(1/2)]");
        opt("--f2.x0", "f2.x0", "factor 2 state at the step start [state units]");
        opt("--f2.a", "f2.a", "factor 2 weight in the sum [dimensionless, default 1]");
        opt("--dt", "dt", "transition step length [time]");
        opt("--eps", "eps",
            "total series-truncation budget in (0,1) [probability mass, default 1e-10]");
        opt("--trunc", "trunc", "truncation policy: tail|normal|window [default tail]");
        opt("--seed", "seed", "master RNG seed [unsigned integer, default 1]");
        opt("--grid", "grid",
            "evaluation grid MIN:MAX:COUNT or auto:COUNT; auto spans [0, mean+10*std] "
            "[state units, default auto:200]");
        opt("--out", "out", "output path [default stdout]");
        opt("--n-samples", "n_samples", "Monte Carlo draw count [count, default 1000000]");
        opt("--n-bins", "n_bins", "histogram bin count [count, default 200]");
        return opt;
    };

    CLI::App* c_pdf = app.add_subcommand("pdf", "tabulate the density on a grid (CSV)");
    add_common(c_pdf);
    CLI::App* c_cdf = app.add_subcommand("cdf", "tabulate the CDF on a grid (CSV)");
    add_common(c_cdf);
    CLI::App* c_mom =
        app.add_subcommand("moments", "closed-form mean and variance (key=value)");
    add_common(c_mom);
    CLI::App* c_sim = app.add_subcommand("simulate", "exact Monte Carlo draws (CSV)");
    add_common(c_sim);
    CLI::App* c_val = app.add_subcommand(
        "validate", "Monte-Carlo-vs-analytic report with PASS/FAIL criteria");
    {
        auto opt = add_common(c_val);
        opt("--analytic-sigma1-scale", "validate.analytic_sigma1_scale",
            "scale sigma1 of the analytic model only; simulation keeps the true value "
            "(negative-control experiments) [dimensionless, default 1]");
    }
    CLI::App* c_fit =
        app.add_subcommand("fit", "maximum-likelihood fit from observed sums");
    {
        auto opt = add_common(c_fit);
        opt("--data", "fit.data", "observations CSV with header 's' [path]");
        opt("--free", "fit.free",
            "comma-separated free parameters among "
            "kappa1,theta1,sigma1,kappa2,theta2,sigma2");
        opt("--budget", "fit.budget",
            "maximum likelihood evaluations [count, default 2000]");
        c_fit->footer(
            "Config-file-only keys: fit.lo.<param> and fit.hi.<param> set the search box "
            "for each free parameter (same units as the parameter; the sigma upper "
            "bounds are shrunk so the whole box satisfies the Feller condition).");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        KeyValueConfig kv;
        if (!config_path.empty()) kv = KeyValueConfig::from_file(config_path);
        for (const auto& [k, v] : overrides) kv.set(k, v);
        const RunConfig rc = resolve(kv);

        if (c_pdf->parsed()) return run_pdf(rc);
        if (c_cdf->parsed()) return run_cdf(rc);
        if (c_mom->parsed()) return run_moments(rc);
        if (c_sim->parsed()) return run_simulate(rc);
        if (c_val->parsed()) return run_validate(rc);
        if (c_fit->parsed()) return run_fit(rc);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const budget_error& e) {
        std::cerr << "numerical budget error: " << e.what() << "\n";
        return 3;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}
