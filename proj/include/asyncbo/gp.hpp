#ifndef ASYNCBO_GP_HPP
#define ASYNCBO_GP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#if defined(__SSE2__) || defined(_M_X64)
#include <xmmintrin.h>
#define ASYNCBO_HAS_MXCSR 1
#endif

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <asyncbo/errors.hpp>
#include <asyncbo/lbfgs.hpp>
#include <asyncbo/rng.hpp>

namespace asyncbo {

/// Smallest noise variance the model will ever use on the diagonal.
inline constexpr double kJitterFloor = 1e-10;
/// Number of x10 jitter escalations attempted before giving up on a factorization.
inline constexpr int kMaxJitterEscalations = 5;

/// Hyperparameters of the isotropic RBF kernel plus observation noise.
struct KernelParams {
    double length_scale = 1.0;
    double signal_variance = 1.0;
    double noise_variance = kJitterFloor;

    /// (log length_scale, log signal_variance, log noise_variance)
    Eigen::Vector3d to_log() const
    {
        return {std::log(length_scale), std::log(signal_variance), std::log(noise_variance)};
    }

    static KernelParams from_log(const Eigen::Vector3d& theta)
    {
        return {std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2])};
    }

    void validate() const
    {
        if (!(length_scale > 0.0) || !std::isfinite(length_scale))
            throw std::invalid_argument("length_scale must be positive and finite");
        if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
            throw std::invalid_argument("signal_variance must be positive and finite");
        if (!(noise_variance >= kJitterFloor) || !std::isfinite(noise_variance))
            throw std::invalid_argument("noise_variance must be finite and at least the jitter floor (1e-10)");
    }

    bool operator==(const KernelParams&) const = default;
};

/// Box bounds for the hyperparameter search, in log space.
struct HyperparameterBounds {
    Eigen::Vector3d lower{std::log(1e-2), std::log(1e-3), std::log(kJitterFloor)};
    Eigen::Vector3d upper{std::log(1e1), std::log(1e2), std::log(1.0)};
};

/// Observed inputs in [0,1]^D and their responses.
class TrainingSet {
public:
    TrainingSet() = default;
    explicit TrainingSet(int dimension) : dim_(dimension)
    {
        if (dimension < 1)
            throw std::invalid_argument("training set dimension must be >= 1");
    }

    void add(const Eigen::VectorXd& x, double y)
    {
        if (x.size() != dim_)
            throw std::invalid_argument("training input has dimension " + std::to_string(x.size()) + ", expected "
                                        + std::to_string(dim_));
        for (Eigen::Index i = 0; i < x.size(); ++i)
            if (!(x[i] >= 0.0 && x[i] <= 1.0))
                throw std::invalid_argument("training input coordinate outside [0,1]");
        if (!std::isfinite(y))
            throw std::invalid_argument("training response must be finite");
        inputs_.push_back(x);
        responses_.push_back(y);
    }

    int dimension() const noexcept { return dim_; }
    std::size_t size() const noexcept { return inputs_.size(); }
    bool empty() const noexcept { return inputs_.empty(); }

    const std::vector<Eigen::VectorXd>& inputs() const noexcept { return inputs_; }
    const std::vector<double>& responses() const noexcept { return responses_; }

    /// Inputs stacked column-wise (D x n).
    Eigen::MatrixXd input_matrix() const
    {
        Eigen::MatrixXd m(dim_, static_cast<Eigen::Index>(inputs_.size()));
        for (std::size_t j = 0; j < inputs_.size(); ++j)
            m.col(static_cast<Eigen::Index>(j)) = inputs_[j];
        return m;
    }

    Eigen::VectorXd response_vector() const
    {
        return Eigen::Map<const Eigen::VectorXd>(responses_.data(), static_cast<Eigen::Index>(responses_.size()));
    }

private:
    int dim_ = 0;
    std::vector<Eigen::VectorXd> inputs_;
    std::vector<double> responses_;
};

/// signal_variance * exp(-|a-b|^2 / (2 length_scale^2))
inline double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& params)
{
    if (a.size() != b.size())
        throw std::invalid_argument("rbf_kernel: dimension mismatch");
    const double r2 = (a - b).squaredNorm();
    return params.signal_variance * std::exp(-0.5 * r2 / (params.length_scale * params.length_scale));
}

struct Prediction {
    double mean = 0.0;
    double std = 0.0;
};

struct LmlResult {
    double value = 0.0;
    /// d value / d (log length_scale, log signal_variance, log noise_variance)
    Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
};

namespace detail {

/// Flushes subnormal results and operands to zero on the current thread
/// while alive.
class FlushDenormals {
public:
#ifdef ASYNCBO_HAS_MXCSR
    FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
    ~FlushDenormals() { _mm_setcsr(saved_); }

private:
    unsigned saved_;
#else
    FlushDenormals() = default;
#endif
public:
    FlushDenormals(const FlushDenormals&) = delete;
    FlushDenormals& operator=(const FlushDenormals&) = delete;
};

inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    const Eigen::Index n = a.cols();
    const Eigen::Index m = b.cols();
    const Eigen::Index dim = a.rows();
    Eigen::MatrixXd d(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double* bj = b.col(j).data();
        for (Eigen::Index i = 0; i < n; ++i) {
            const double* ai = a.col(i).data();
            double s = 0.0;
            for (Eigen::Index k = 0; k < dim; ++k) {
                const double t = ai[k] - bj[k];
                s += t * t;
            }
            d(i, j) = s;
        }
    }
    return d;
}

inline Eigen::MatrixXd rbf_from_sqdist(const Eigen::MatrixXd& sqdist, const KernelParams& p)
{
    const double scale = -0.5 / (p.length_scale * p.length_scale);
    return p.signal_variance * (sqdist.array() * scale).exp().matrix();
}

inline bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt)
{
    if (llt.info() != Eigen::Success)
        return false;
    const auto diag = llt.matrixLLT().diagonal();
    return diag.allFinite() && (diag.array() > 0.0).all();
}

/// Log marginal likelihood of a fixed training set under varying
/// hyperparameters. Caches the pairwise distances.
class LmlEvaluator {
public:
    explicit LmlEvaluator(const TrainingSet& train)
        : sqdist_(
            [&] {
                const Eigen::MatrixXd x = train.input_matrix();
                return squared_distances(x, x);
            }()),
          y_(train.response_vector())
    {
        if (train.empty())
            throw std::invalid_argument("log marginal likelihood needs at least one training point");
    }

    /// std::nullopt if K + noise*I is not numerically positive definite.
    /// Not reentrant: reuses internal workspace between calls.
    std::optional<LmlResult> operator()(const KernelParams& p) const
    {
        const FlushDenormals ftz;
        const Eigen::Index n = y_.size();
        const double scale = -0.5 / (p.length_scale * p.length_scale);
        kf_ = p.signal_variance * (sqdist_.array() * scale).exp().matrix();
        k_ = kf_;
        k_.diagonal().array() += p.noise_variance;
        llt_.compute(k_);
        if (!factor_ok(llt_))
            return std::nullopt;

        const Eigen::VectorXd alpha = llt_.solve(y_);
        LmlResult res;
        res.value = -0.5 * y_.dot(alpha) - llt_.matrixLLT().diagonal().array().log().sum()
                    - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

        // W = alpha alpha^T - K^{-1};  dL/dtheta = 0.5 tr(W dK/dtheta)
        // L^{-1} one column panel at a time, skipping the zero upper part.
        const Eigen::MatrixXd& l = llt_.matrixLLT();
        linv_.setZero(n, n);
        constexpr Eigen::Index panel = 32;
        for (Eigen::Index j0 = 0; j0 < n; j0 += panel) {
            const Eigen::Index b = std::min(panel, n - j0);
            const Eigen::Index m = n - j0;
            auto blk = linv_.block(j0, j0, m, b);
            blk.topRows(b).setIdentity();
            l.bottomRightCorner(m, m).triangularView<Eigen::Lower>().solveInPlace(blk);
        }
        w_.noalias() = alpha * alpha.transpose();
        w_.selfadjointView<Eigen::Lower>().rankUpdate(linv_.transpose(), -1.0);
        w_.triangularView<Eigen::StrictlyUpper>() = w_.transpose();
        kf_.array() *= w_.array();
        const double inv_l2 = 1.0 / (p.length_scale * p.length_scale);
        res.gradient[0] = 0.5 * (kf_.array() * sqdist_.array()).sum() * inv_l2;
        res.gradient[1] = 0.5 * kf_.sum();
        res.gradient[2] = 0.5 * p.noise_variance * w_.trace();
        ++evaluations_;
        if (!std::isfinite(res.value) || !res.gradient.allFinite())
            return std::nullopt;
        return res;
    }

    long evaluations() const noexcept { return evaluations_; }

private:
    Eigen::MatrixXd sqdist_;
    Eigen::VectorXd y_;
    mutable Eigen::MatrixXd kf_, k_, linv_, w_;
    mutable Eigen::LLT<Eigen::MatrixXd> llt_;
    mutable long evaluations_ = 0;
};

} // namespace detail

/// Log marginal likelihood and its analytic gradient in log-parameter space.
/// Throws NumericalError if the covariance cannot be factored.
inline LmlResult log_marginal_likelihood(const TrainingSet& train, const KernelParams& params)
{
    params.validate();
    auto res = detail::LmlEvaluator(train)(params);
    if (!res)
        throw NumericalError("log marginal likelihood: covariance matrix is not positive definite");
    return *res;
}

/// Gaussian process posterior with zero prior mean. Immutable once built.
class GPModel {
public:
    /// Prior-only model (no data): mean 0, std sqrt(signal_variance) everywhere.
    static GPModel prior(int dimension, KernelParams params = {})
    {
        params.validate();
        GPModel m;
        m.train_ = TrainingSet(dimension);
        m.params_ = params;
        m.noise_used_ = params.noise_variance;
        return m;
    }

    /// Conditions on `train` with fixed hyperparameters (no optimization).
    /// Escalates diagonal jitter x10 up to kMaxJitterEscalations times.
    static GPModel with_params(TrainingSet train, KernelParams params)
    {
        const detail::FlushDenormals ftz;
        params.validate();
        GPModel m;
        m.params_ = params;
        m.train_ = std::move(train);
        if (m.train_.empty()) {
            m.noise_used_ = params.noise_variance;
            return m;
        }
        m.x_ = m.train_.input_matrix();
        const Eigen::MatrixXd kf = detail::rbf_from_sqdist(detail::squared_distances(m.x_, m.x_), params);
        const Eigen::VectorXd y = m.train_.response_vector();

        double noise = params.noise_variance;
        for (int attempt = 0; attempt <= kMaxJitterEscalations; ++attempt) {
            Eigen::MatrixXd k = kf;
            k.diagonal().array() += noise;
            Eigen::LLT<Eigen::MatrixXd> llt(k);
            if (detail::factor_ok(llt)) {
                m.chol_ = llt.matrixL();
                m.alpha_ = llt.solve(y);
                m.noise_used_ = noise;
                m.escalations_ = attempt;
                if (!m.alpha_.allFinite())
                    break;
                return m;
            }
            if (attempt < kMaxJitterEscalations)
                noise *= 10.0;
        }

        Eigen::MatrixXd k = kf;
        k.diagonal().array() += params.noise_variance;
        const double rcond = Eigen::LDLT<Eigen::MatrixXd>(k).rcond();
        std::ostringstream msg;
        msg << "covariance factorization failed after " << kMaxJitterEscalations
            << " jitter escalations (n = " << m.train_.size() << ", condition estimate ~ "
            << (rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity()) << ")";
        throw NumericalError(msg.str());
    }

    int dimension() const noexcept { return train_.dimension(); }
    const KernelParams& params() const noexcept { return params_; }
    const TrainingSet& training() const noexcept { return train_; }
    /// Lower-triangular L with L L^T = K + effective_noise_variance() * I.
    const Eigen::MatrixXd& chol_factor() const noexcept { return chol_; }
    const Eigen::VectorXd& weights() const noexcept { return alpha_; }
    double effective_noise_variance() const noexcept { return noise_used_; }
    int jitter_escalations() const noexcept { return escalations_; }

    Prediction predict(const Eigen::VectorXd& query) const
    {
        Eigen::VectorXd mean, sd;
        predict(Eigen::MatrixXd(query), mean, sd);
        return {mean[0], sd[0]};
    }

    std::vector<Prediction> predict(std::span<const Eigen::VectorXd> queries) const
    {
        Eigen::MatrixXd q(dimension(), static_cast<Eigen::Index>(queries.size()));
        for (std::size_t j = 0; j < queries.size(); ++j) {
            if (queries[j].size() != dimension())
                throw std::invalid_argument("predict: query dimension mismatch");
            q.col(static_cast<Eigen::Index>(j)) = queries[j];
        }
        Eigen::VectorXd mean, sd;
        predict(q, mean, sd);
        std::vector<Prediction> out(queries.size());
        for (std::size_t j = 0; j < queries.size(); ++j)
            out[j] = {mean[static_cast<Eigen::Index>(j)], sd[static_cast<Eigen::Index>(j)]};
        return out;
    }

    /// Batch form: `queries` holds one query per column (D x M).
    void predict(const Eigen::MatrixXd& queries, Eigen::VectorXd& mean, Eigen::VectorXd& std_dev) const
    {
        if (queries.rows() != dimension())
            throw std::invalid_argument("predict: query dimension mismatch");
        const detail::FlushDenormals ftz;
        const Eigen::Index m = queries.cols();
        if (train_.empty()) {
            mean = Eigen::VectorXd::Zero(m);
            std_dev = Eigen::VectorXd::Constant(m, std::sqrt(params_.signal_variance));
            return;
        }
        const Eigen::MatrixXd ks = detail::rbf_from_sqdist(detail::squared_distances(x_, queries), params_);
        mean = ks.transpose() * alpha_;
        const Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
        const Eigen::ArrayXd var = params_.signal_variance - v.colwise().squaredNorm().transpose().array();
        std_dev = var.max(0.0).sqrt().matrix();
    }

private:
    GPModel() = default;

    KernelParams params_;
    TrainingSet train_;
    Eigen::MatrixXd x_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
    double noise_used_ = kJitterFloor;
    int escalations_ = 0;
};

struct FitOptions {
    int random_restarts = 3;
    /// Optimum of the previous fit; tried first when present.
    std::optional<KernelParams> warm_start;
    HyperparameterBounds bounds;
    opt::LbfgsOptions lbfgs;
};

/// Maximizes the log marginal likelihood over (log l, log sf2, log sn2) with
/// box-constrained L-BFGS from the warm start plus `random_restarts` uniform
/// draws in the box, then conditions on the data. With a single observation
/// the noise variance is not identifiable and is held at the floor.
inline GPModel fit(const TrainingSet& train, Rng& rng, const FitOptions& options = {})
{
    if (train.empty())
        throw std::invalid_argument("fit: training set is empty");

    Eigen::Vector3d lower = options.bounds.lower;
    Eigen::Vector3d upper = options.bounds.upper;
    if (train.size() == 1)
        upper[2] = lower[2];

    std::vector<Eigen::Vector3d> starts;
    if (options.warm_start)
        starts.push_back(options.warm_start->to_log().cwiseMax(lower).cwiseMin(upper));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 0; r < options.random_restarts; ++r) {
        Eigen::Vector3d t;
        for (int i = 0; i < 3; ++i)
            t[i] = lower[i] + unit(rng) * (upper[i] - lower[i]);
        starts.push_back(t);
    }

    const detail::LmlEvaluator lml(train);
    auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
        const auto res = lml(KernelParams::from_log(theta));
        if (!res) {
            grad.setZero();
            return std::numeric_limits<double>::infinity();
        }
        grad = -res->gradient;
        return -res->value;
    };

    std::optional<Eigen::Vector3d> best;
    double best_value = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        const auto r = opt::minimize_box(objective, Eigen::VectorXd(s), lower, upper, options.lbfgs);
        if (r && r->value < best_value) {
            best_value = r->value;
            best = r->x;
        }
    }
    if (!best)
        throw NumericalError("fit: covariance not positive definite at any hyperparameter restart (n = "
                             + std::to_string(train.size()) + ")");

    KernelParams p = KernelParams::from_log(*best);
    p.noise_variance = std::max(p.noise_variance, kJitterFloor);
    return GPModel::with_params(train, p);
}

inline GPModel fit(const TrainingSet& train, std::uint64_t seed, const FitOptions& options = {})
{
    Rng rng = make_stream(seed, Stream::HyperparameterRestarts);
    return fit(train, rng, options);
}

} // namespace asyncbo

#endif
