#ifndef ASYNCBO_TRIPEAK_HPP
#define ASYNCBO_TRIPEAK_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <asyncbo/rng.hpp>

namespace asyncbo {

/// Three isotropic Gaussian bumps centred on the diagonal of [0,1]^D:
///
///   f(x) = c * sum_j b_j * exp(-sum_i a_j^2 (x_i - mu_j)^2),  c = 1 / (D (b_1 + b_2 + b_3))
class TriPeakSpec {
public:
    static constexpr std::array<double, 3> width{4.0, 1.5, 4.0};
    static constexpr std::array<double, 3> center{0.2, 0.5, 0.8};
    static constexpr std::array<double, 3> height{0.3, 0.2, 0.6};

    explicit TriPeakSpec(int dimension, double noise_std = 0.0) : dim_(dimension), noise_std_(noise_std)
    {
        if (dimension < 1)
            throw std::invalid_argument("TriPeak dimension must be >= 1");
        if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
            throw std::invalid_argument("TriPeak noise_std must be finite and >= 0");
        norm_ = 1.0 / (static_cast<double>(dim_) * (height[0] + height[1] + height[2]));
    }

    int dimension() const noexcept { return dim_; }
    double noise_std() const noexcept { return noise_std_; }
    double normalization() const noexcept { return norm_; }

private:
    int dim_;
    double noise_std_;
    double norm_;
};

/// Seeded Normal(0, noise_std^2) stream; one per campaign.
class NoiseModel {
public:
    NoiseModel(double noise_std, Rng rng) : noise_std_(noise_std), rng_(std::move(rng))
    {
        if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
            throw std::invalid_argument("noise_std must be finite and >= 0");
    }
    NoiseModel(double noise_std, std::uint64_t seed) : NoiseModel(noise_std, make_stream(seed, Stream::Noise)) {}

    double noise_std() const noexcept { return noise_std_; }

    /// Consumes exactly one normal draw, even when noise_std == 0.
    double draw()
    {
        const double z = normal_(rng_);
        return noise_std_ == 0.0 ? 0.0 : noise_std_ * z;
    }

private:
    double noise_std_;
    Rng rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double tripeak_true(const TriPeakSpec& spec, const Eigen::VectorXd& x)
{
    if (x.size() != spec.dimension())
        throw std::invalid_argument("tripeak: input has dimension " + std::to_string(x.size()) + ", expected "
                                    + std::to_string(spec.dimension()));
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!(x[i] >= 0.0 && x[i] <= 1.0))
            throw std::invalid_argument("tripeak: coordinate outside [0,1]");
    // Coordinates are summed in sorted order so permuted inputs give
    // bit-identical values.
    std::vector<double> xs(x.data(), x.data() + x.size());
    std::sort(xs.begin(), xs.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        const double a2 = TriPeakSpec::width[j] * TriPeakSpec::width[j];
        double r2 = 0.0;
        for (double v : xs)
            r2 += (v - TriPeakSpec::center[j]) * (v - TriPeakSpec::center[j]);
        sum += TriPeakSpec::height[j] * std::exp(-a2 * r2);
    }
    return spec.normalization() * sum;
}

inline double tripeak_observe(const TriPeakSpec& spec, const Eigen::VectorXd& x, NoiseModel& noise)
{
    const double f = tripeak_true(spec, x);
    return f + noise.draw();
}

struct Optimum {
    Eigen::VectorXd x_star;
    double f_star = 0.0;
};

namespace detail {

/// f restricted to the diagonal x = (t, ..., t).
inline double tripeak_diagonal(const TriPeakSpec& spec, double t)
{
    const double d = spec.dimension();
    double sum = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
        const double a2 = TriPeakSpec::width[j] * TriPeakSpec::width[j];
        const double dt = t - TriPeakSpec::center[j];
        sum += TriPeakSpec::height[j] * std::exp(-a2 * d * dt * dt);
    }
    return spec.normalization() * sum;
}

} // namespace detail

/// Global maximizer. All peak centres lie on the diagonal, so the maximum is
/// found by a dense scan of f(t, ..., t) followed by ternary refinement.
inline Optimum global_optimum(const TriPeakSpec& spec)
{
    if (spec.dimension() > 10)
        throw std::invalid_argument("global_optimum supports dimension <= 10");
    constexpr int grid = 100000;
    int best = 0;
    double best_f = -1.0;
    for (int i = 0; i <= grid; ++i) {
        const double f = detail::tripeak_diagonal(spec, static_cast<double>(i) / grid);
        if (f > best_f) {
            best_f = f;
            best = i;
        }
    }
    double lo = std::max(0, best - 1) / static_cast<double>(grid);
    double hi = std::min(grid, best + 1) / static_cast<double>(grid);
    while (hi - lo > 1e-10) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (detail::tripeak_diagonal(spec, m1) < detail::tripeak_diagonal(spec, m2))
            lo = m1;
        else
            hi = m2;
    }
    double t = 0.5 * (lo + hi);
    if (detail::tripeak_diagonal(spec, t) < best_f)
        t = static_cast<double>(best) / grid;

    Optimum opt;
    opt.x_star = Eigen::VectorXd::Constant(spec.dimension(), t);
    opt.f_star = tripeak_true(spec, opt.x_star);
    return opt;
}

} // namespace asyncbo

#endif
