#ifndef ASYNCBO_RNG_HPP
#define ASYNCBO_RNG_HPP

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace asyncbo {

using Rng = std::mt19937_64;

/// Fixed stream offsets used by a campaign. Each purpose gets its own
/// generator so that, e.g., the initial design does not depend on how many
/// candidate draws a policy consumed.
enum class Stream : std::uint64_t {
    Initialization = 1,
    Candidates = 2,
    Noise = 3,
    HyperparameterRestarts = 4,
};

/// Derives an independent generator from (seed, stream).
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return Rng(seq);
}

inline Rng make_stream(std::uint64_t seed, Stream stream)
{
    return make_stream(seed, static_cast<std::uint64_t>(stream));
}

/// Uniform point in [0,1]^dim.
inline Eigen::VectorXd uniform_point(int dim, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i)
        x[i] = unit(rng);
    return x;
}

} // namespace asyncbo

#endif
