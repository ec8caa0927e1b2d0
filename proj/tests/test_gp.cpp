#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <asyncbo/gp.hpp>

#include "support/oracles.hpp"

using namespace asyncbo;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v)
{
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v)
        x[i++] = e;
    return x;
}

TrainingSet random_set(int dim, int n, Rng& rng)
{
    std::normal_distribution<double> normal;
    TrainingSet t(dim);
    for (int i = 0; i < n; ++i)
        t.add(uniform_point(dim, rng), normal(rng));
    return t;
}

KernelParams random_params(Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {std::exp(std::log(0.1) + u(rng) * std::log(20.0)), std::exp(std::log(0.1) + u(rng) * std::log(100.0)),
            std::exp(std::log(1e-4) + u(rng) * std::log(1e3))};
}

} // namespace

TEST(Kernel, RbfValues)
{
    const KernelParams p{0.5, 2.0, 1e-10};
    EXPECT_DOUBLE_EQ(rbf_kernel(vec({0.3, 0.3}), vec({0.3, 0.3}), p), 2.0);
    EXPECT_NEAR(rbf_kernel(vec({0.0}), vec({1.0}), p), 2.0 * std::exp(-2.0), 1e-15);
    EXPECT_NEAR(rbf_kernel(vec({0.0}), vec({1.0}), KernelParams{}), std::exp(-0.5), 1e-15);
    EXPECT_THROW(rbf_kernel(vec({0.0}), vec({0.0, 1.0}), p), std::invalid_argument);
}

TEST(Kernel, LogRoundTrip)
{
    const KernelParams p{0.37, 4.2, 3e-6};
    const KernelParams q = KernelParams::from_log(p.to_log());
    EXPECT_NEAR(q.length_scale, p.length_scale, 1e-15);
    EXPECT_NEAR(q.signal_variance, p.signal_variance, 1e-14);
    EXPECT_NEAR(q.noise_variance, p.noise_variance, 1e-20);
}

TEST(Kernel, ParamsValidation)
{
    EXPECT_THROW((KernelParams{0.0, 1.0, 1e-6}).validate(), std::invalid_argument);
    EXPECT_THROW((KernelParams{1.0, -1.0, 1e-6}).validate(), std::invalid_argument);
    EXPECT_THROW((KernelParams{1.0, 1.0, 1e-12}).validate(), std::invalid_argument);
    EXPECT_NO_THROW((KernelParams{1.0, 1.0, 1e-10}).validate());
}

TEST(TrainingSetTest, RejectsBadInput)
{
    TrainingSet t(2);
    EXPECT_THROW(t.add(vec({0.5}), 1.0), std::invalid_argument);
    EXPECT_THROW(t.add(vec({0.5, 1.5}), 1.0), std::invalid_argument);
    EXPECT_THROW(t.add(vec({0.5, 0.5}), std::nan("")), std::invalid_argument);
    t.add(vec({0.5, 0.5}), 1.0);
    EXPECT_EQ(t.size(), 1u);
}

TEST(GPPredict, TwoPointInversion)
{
    TrainingSet t(1);
    t.add(vec({0.0}), 0.0);
    t.add(vec({1.0}), 1.0);
    const GPModel m = GPModel::with_params(t, KernelParams{1.0, 1.0, 1e-10});
    const Prediction p = m.predict(vec({0.5}));
    // K = [[1, e^-1/2], [e^-1/2, 1]], k* = e^-1/8 (1, 1)
    EXPECT_NEAR(p.mean, 0.5493184317705155, 1e-9);
    const double k = std::exp(-0.5), ks = std::exp(-0.125);
    const double quad = 2.0 * ks * ks * (1.0 - k) / (1.0 - k * k);
    EXPECT_NEAR(p.std, std::sqrt(1.0 - quad), 1e-8);
}

TEST(GPPredict, InterpolatesTrainingPoints)
{
    Rng rng(11);
    const TrainingSet t = random_set(3, 6, rng);
    const GPModel m = GPModel::with_params(t, KernelParams{0.3, 1.0, 1e-10});
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Prediction p = m.predict(t.inputs()[i]);
        EXPECT_NEAR(p.mean, t.responses()[i], 1e-6);
        EXPECT_LT(p.std, 1e-3);
    }
}

TEST(GPPredict, FarQueryRevertsToPrior)
{
    TrainingSet t(2);
    t.add(vec({0.0, 0.0}), 0.7);
    const GPModel m = GPModel::with_params(t, KernelParams{0.01, 2.5, 1e-10});
    const Prediction p = m.predict(vec({1.0, 1.0}));
    EXPECT_NEAR(p.mean, 0.0, 1e-12);
    EXPECT_NEAR(p.std, std::sqrt(2.5), 1e-12);
}

TEST(GPPredict, PriorModel)
{
    const GPModel m = GPModel::prior(3, KernelParams{0.2, 4.0, 1e-10});
    const Prediction p = m.predict(vec({0.1, 0.2, 0.3}));
    EXPECT_EQ(p.mean, 0.0);
    EXPECT_DOUBLE_EQ(p.std, 2.0);
}

TEST(GPPredict, DimensionMismatchThrows)
{
    TrainingSet t(2);
    t.add(vec({0.1, 0.2}), 0.0);
    const GPModel m = GPModel::with_params(t, KernelParams{});
    EXPECT_THROW(m.predict(vec({0.1})), std::invalid_argument);
}

TEST(GPPredict, BatchMatchesSingle)
{
    Rng rng(5);
    const TrainingSet t = random_set(2, 7, rng);
    const GPModel m = GPModel::with_params(t, KernelParams{0.4, 1.3, 1e-4});
    std::vector<Eigen::VectorXd> qs;
    for (int i = 0; i < 20; ++i)
        qs.push_back(uniform_point(2, rng));
    const auto batch = m.predict(std::span<const Eigen::VectorXd>(qs));
    ASSERT_EQ(batch.size(), qs.size());
    for (std::size_t i = 0; i < qs.size(); ++i) {
        const Prediction p = m.predict(qs[i]);
        EXPECT_NEAR(batch[i].mean, p.mean, 1e-10);
        EXPECT_NEAR(batch[i].std, p.std, 1e-10);
    }
}

TEST(GPPredict, MatchesDenseInversionOracle)
{
    Rng rng(2024);
    std::uniform_int_distribution<int> dim_d(1, 6), n_d(1, 8);
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = dim_d(rng), n = n_d(rng);
        const TrainingSet t = random_set(dim, n, rng);
        const KernelParams p = random_params(rng);
        const GPModel m = GPModel::with_params(t, p);
        ASSERT_EQ(m.jitter_escalations(), 0);
        const oracle::DenseGp oracle(t, p);
        for (int q = 0; q < 10; ++q) {
            const Eigen::VectorXd x = uniform_point(dim, rng);
            const Prediction got = m.predict(x), want = oracle.predict(x);
            EXPECT_NEAR(got.mean, want.mean, 1e-8) << "trial " << trial;
            EXPECT_NEAR(got.std, want.std, 1e-8) << "trial " << trial;
        }
    }
}

TEST(GPPredict, CholeskyReconstructsCovariance)
{
    Rng rng(99);
    const TrainingSet t = random_set(3, 8, rng);
    const KernelParams p{0.5, 1.7, 1e-3};
    const GPModel m = GPModel::with_params(t, p);
    const Eigen::MatrixXd& l = m.chol_factor();
    const Eigen::MatrixXd x = t.input_matrix();
    for (Eigen::Index i = 0; i < 8; ++i)
        for (Eigen::Index j = 0; j < 8; ++j) {
            const double want = rbf_kernel(x.col(i), x.col(j), p) + (i == j ? p.noise_variance : 0.0);
            EXPECT_NEAR((l * l.transpose())(i, j), want, 1e-12);
        }
}

TEST(Lml, MatchesDenseOracle)
{
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const TrainingSet t = random_set(1 + trial % 5, 2 + trial % 7, rng);
        const KernelParams p = random_params(rng);
        EXPECT_NEAR(log_marginal_likelihood(t, p).value, oracle::DenseGp(t, p).lml(), 1e-8);
    }
}

TEST(Lml, StandardNormalAtZero)
{
    TrainingSet t(1);
    t.add(vec({0.4}), 0.0);
    const double v = log_marginal_likelihood(t, KernelParams{0.3, 1.0 - 1e-6, 1e-6}).value;
    EXPECT_NEAR(v, -0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
    EXPECT_NEAR(v, -0.9189385332, 1e-9);
}

TEST(Lml, GradientMatchesCentralDifferences)
{
    Rng rng(31);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const TrainingSet t = random_set(1 + trial % 4, 5, rng);
        const KernelParams p = random_params(rng);
        const LmlResult r = log_marginal_likelihood(t, p);
        const Eigen::Vector3d fd = oracle::lml_fd_gradient(t, p, h);
        for (int i = 0; i < 3; ++i) {
            const double scale = std::max({std::abs(fd[i]), std::abs(r.gradient[i]), 1e-6});
            EXPECT_LT(std::abs(fd[i] - r.gradient[i]) / scale, 1e-5) << "trial " << trial << " component " << i;
        }
    }
}

TEST(Lml, NoiseSweepOnPureNoise)
{
    // Far-apart inputs with a tiny length scale make K diagonal, so the LML
    // is a sum of independent normal log-densities with variance sv + nv and
    // rises with nv as long as sv + nv is below the sample second moment.
    TrainingSet t(1);
    const std::array<double, 5> ys{0.9, -1.1, 0.7, -0.8, 1.2};
    for (std::size_t i = 0; i < ys.size(); ++i)
        t.add(vec({0.25 * static_cast<double>(i)}), ys[i]);
    double m2 = 0.0;
    for (double y : ys)
        m2 += y * y / ys.size();
    double prev = -std::numeric_limits<double>::infinity();
    for (double nv = 1e-4; 1e-3 + 2.0 * nv < m2; nv *= 2.0) {
        const double v = log_marginal_likelihood(t, KernelParams{0.01, 1e-3, nv}).value;
        EXPECT_GT(v, prev);
        prev = v;
    }
    const double at_m2 = log_marginal_likelihood(t, KernelParams{0.01, 1e-3, m2 - 1e-3}).value;
    const double beyond = log_marginal_likelihood(t, KernelParams{0.01, 1e-3, 2.0 * m2}).value;
    EXPECT_GT(at_m2, beyond);
}

TEST(Lml, EmptyTrainingSetThrows)
{
    EXPECT_THROW(log_marginal_likelihood(TrainingSet(2), KernelParams{}), std::invalid_argument);
}

TEST(Fit, SinglePointInterpolates)
{
    TrainingSet t(1);
    t.add(vec({0.5}), 1.0);
    const GPModel m = fit(t, std::uint64_t{3});
    const Prediction p = m.predict(vec({0.5}));
    EXPECT_NEAR(p.mean, 1.0, 1e-6);
    EXPECT_LT(p.std, 1e-3);
    EXPECT_EQ(m.params().noise_variance, kJitterFloor);
}

TEST(Fit, ReplicatedInputsAbsorbSpreadIntoNoise)
{
    TrainingSet t(2);
    const Eigen::VectorXd x = vec({0.3, 0.6});
    for (double y : {0.1, 0.5, 0.2, 0.45, 0.3})
        t.add(x, y);
    t.add(vec({0.9, 0.1}), 0.0);
    const GPModel m = fit(t, std::uint64_t{1});
    EXPECT_GT(m.params().noise_variance, 1e-4);
    EXPECT_NEAR(m.predict(x).mean, 0.31, 0.1);
}

TEST(Fit, StaysInsideBounds)
{
    Rng rng(8);
    const TrainingSet t = random_set(3, 12, rng);
    const GPModel m = fit(t, std::uint64_t{8});
    const HyperparameterBounds b;
    const Eigen::Vector3d th = m.params().to_log();
    for (int i = 0; i < 3; ++i) {
        EXPECT_GE(th[i], b.lower[i] - 1e-12);
        EXPECT_LE(th[i], b.upper[i] + 1e-12);
    }
}

TEST(Fit, ImprovesOnStartingPoints)
{
    Rng rng(17);
    TrainingSet t(2);
    for (int i = 0; i < 15; ++i) {
        const Eigen::VectorXd x = uniform_point(2, rng);
        t.add(x, std::sin(6.0 * x[0]) * std::cos(4.0 * x[1]));
    }
    FitOptions opts;
    opts.warm_start = KernelParams{1.0, 1.0, 1e-2};
    const GPModel m = fit(t, std::uint64_t{17}, opts);
    EXPECT_GT(log_marginal_likelihood(t, m.params()).value, log_marginal_likelihood(t, *opts.warm_start).value);
}

TEST(Fit, DeterministicForSameSeed)
{
    Rng rng(4);
    const TrainingSet t = random_set(4, 10, rng);
    const GPModel a = fit(t, std::uint64_t{77});
    const GPModel b = fit(t, std::uint64_t{77});
    EXPECT_EQ(a.params(), b.params());
    EXPECT_EQ(a.weights(), b.weights());
}

TEST(Fit, EmptyTrainingSetThrows)
{
    EXPECT_THROW(fit(TrainingSet(2), std::uint64_t{1}), std::invalid_argument);
}

namespace {

TrainingSet dense_grid(int n)
{
    TrainingSet t(1);
    for (int i = 0; i < n; ++i)
        t.add(Eigen::VectorXd::Constant(1, static_cast<double>(i) / (n - 1)), 0.01 * i);
    return t;
}

} // namespace

TEST(Jitter, EscalatesByFactorsOfTen)
{
    // A smooth kernel with a huge amplitude on a dense grid loses positive
    // definiteness to rounding at the jitter floor.
    const KernelParams p{2.0, 1e8, 1e-10};
    const GPModel m = GPModel::with_params(dense_grid(20), p);
    EXPECT_GE(m.jitter_escalations(), 1);
    EXPECT_LE(m.jitter_escalations(), kMaxJitterEscalations);
    EXPECT_NEAR(m.effective_noise_variance(), p.noise_variance * std::pow(10.0, m.jitter_escalations()), 1e-22);
    EXPECT_TRUE(m.chol_factor().allFinite());
    EXPECT_EQ(m.params(), p);
}

TEST(Jitter, GivesUpAfterFiveEscalations)
{
    try {
        (void)GPModel::with_params(dense_grid(50), KernelParams{2.0, 1e10, 1e-10});
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("5 jitter escalations"), std::string::npos);
        EXPECT_NE(msg.find("condition"), std::string::npos);
    }
}

TEST(Jitter, WellConditionedNeedsNone)
{
    Rng rng(1);
    const TrainingSet t = random_set(2, 5, rng);
    const GPModel m = GPModel::with_params(t, KernelParams{0.2, 1.0, 1e-6});
    EXPECT_EQ(m.jitter_escalations(), 0);
    EXPECT_EQ(m.effective_noise_variance(), 1e-6);
}
