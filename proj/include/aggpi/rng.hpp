#pragma once

#include <cstdint>
#include <random>

namespace aggpi {

/// Mixes a base seed with a stream index (splitmix64 finalizer). Used to give
/// every repetition, replicate and fold its own independent stream so results
/// do not depend on the order in which work units run.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Random source for all simulation code.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. The variate transforms below are implemented here rather than
/// taken from <random> distributions, whose algorithms are unspecified, so a
/// seed reproduces the same draws on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();

    /// Uniform on (lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on {0, ..., n-1}; n must be positive.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal (Box-Muller; the second variate is cached).
    double normal();

    /// Standard exponential.
    double exponential();

    /// Geometric on {1, 2, ...} with success probability p in (0, 1].
    std::uint64_t geometric(double p);

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace aggpi
