#include "cirsum/rng.hpp"

#include <cmath>

#include "cirsum/errors.hpp"
#include "cirsum/specfun.hpp"

namespace cirsum {

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double Rng::gamma(double shape) {
    if (!(shape > 0.0)) throw domain_error("Rng::gamma: shape must be positive");
    if (shape < 1.0) {
        // Boost a shape+1 draw down: if G ~ Gamma(a+1) and U ~ U(0,1) then
        // G * U^{1/a} ~ Gamma(a).
        return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

std::uint64_t Rng::poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
        throw domain_error("Rng::poisson: mean must be nonnegative and finite");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        // Inversion by product of uniforms.
        const double limit = std::exp(-mean);
        double prod = 1.0;
        std::uint64_t k = 0;
        for (;;) {
            prod *= uniform();
            if (prod <= limit) return k;
            ++k;
        }
    }
    // Hormann's PTRS transformed-rejection sampler.
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_mean = std::log(mean);
    for (;;) {
        const double u = uniform() - 0.5;
        double v = uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kf * log_mean - mean - log_gamma(kf + 1.0))
            return static_cast<std::uint64_t>(kf);
    }
}

std::uint64_t substream_seed(std::uint64_t master, unsigned stream_index) {
    std::uint64_t x = master;
    std::uint64_t z = 0;
    for (unsigned i = 0; i <= stream_index; ++i) {
        x += 0x9E3779B97F4A7C15ull;
        z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
    }
    return z;
}

}  // namespace cirsum
