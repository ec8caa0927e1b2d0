#ifndef ASYNCBO_ACQUISITION_HPP
#define ASYNCBO_ACQUISITION_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Core>

#include <asyncbo/gp.hpp>
#include <asyncbo/rng.hpp>

namespace asyncbo {

/// Default exploration weight, 5 / sqrt(2).
inline constexpr double kDefaultLambda = 5.0 / std::numbers::sqrt2;

struct AcquisitionConfig {
    double lambda = kDefaultLambda;
    /// Random candidates per input dimension; the candidate set has
    /// candidates_per_dim * D points unless candidate_count overrides it.
    int candidates_per_dim = 1024;
    int candidate_count = 0;

    int candidates_for(int dimension) const { return candidate_count > 0 ? candidate_count : candidates_per_dim * dimension; }

    void validate() const
    {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("acquisition lambda must be positive");
        if (candidates_per_dim < 1 && candidate_count < 1)
            throw std::invalid_argument("acquisition needs at least one candidate");
        if (candidate_count < 0)
            throw std::invalid_argument("candidate_count must be >= 0");
    }
};

inline double ucb_score(double mean, double std_dev, double lambda) { return mean + lambda * std_dev; }

inline double lcb_score(double mean, double std_dev, double lambda) { return mean - lambda * std_dev; }

/// M uniform candidates in [0,1]^D, one per column.
inline Eigen::MatrixXd draw_candidates(int dimension, int count, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd c(dimension, count);
    for (int j = 0; j < count; ++j)
        for (int i = 0; i < dimension; ++i)
            c(i, j) = unit(rng);
    return c;
}

/// Index of the candidate column maximizing mean + lambda * std (lowest index on ties).
inline Eigen::Index argmax_ucb(const GPModel& model, const Eigen::MatrixXd& candidates, double lambda)
{
    if (candidates.cols() == 0)
        throw std::invalid_argument("argmax_ucb: no candidates");
    constexpr Eigen::Index chunk = 256;
    Eigen::VectorXd mean, sd;
    Eigen::Index best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index start = 0; start < candidates.cols(); start += chunk) {
        const Eigen::Index len = std::min(chunk, candidates.cols() - start);
        model.predict(candidates.middleCols(start, len), mean, sd);
        for (Eigen::Index j = 0; j < len; ++j) {
            const double s = ucb_score(mean[j], sd[j], lambda);
            if (s > best_score || start + j == 0) {
                best_score = s;
                best = start + j;
            }
        }
    }
    return best;
}

/// Next experiment: the UCB maximizer over a fresh random candidate set
/// drawn from `rng`.
inline Eigen::VectorXd select_next(const GPModel& model, const AcquisitionConfig& cfg, int dimension, Rng& rng)
{
    cfg.validate();
    if (model.dimension() != dimension)
        throw std::invalid_argument("select_next: model dimension does not match");
    const Eigen::MatrixXd candidates = draw_candidates(dimension, cfg.candidates_for(dimension), rng);
    return candidates.col(argmax_ucb(model, candidates, cfg.lambda));
}

} // namespace asyncbo

#endif
