#pragma once

#include <cstdint>
#include <random>

namespace cirsum {

// Deterministic random source.  Only the mt19937_64 engine comes from the
// standard library; every variate transform is implemented here so that a
// given seed produces the same stream on every platform and standard library
// (std::normal_distribution etc. are implementation-defined).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on (0,1): never returns an endpoint.
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    // Standard normal via Marsaglia's polar method with a cached spare.
    double normal();

    // Gamma(shape, scale 1), any shape > 0.  Marsaglia-Tsang squeeze method;
    // shapes below 1 use the boosting identity G(a) = G(a+1) * U^{1/a}.
    double gamma(double shape);

    // Poisson(mean): product-of-uniforms inversion below mean 10, Hormann's
    // PTRS transformed rejection above.
    std::uint64_t poisson(double mean);

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Seed for the i-th independent substream of a master seed: the (i+1)-th
// output of a splitmix64 generator initialized with the master seed.  This is
// the documented splitting rule used by all sharded sampling.
std::uint64_t substream_seed(std::uint64_t master, unsigned stream_index);

}  // namespace cirsum
