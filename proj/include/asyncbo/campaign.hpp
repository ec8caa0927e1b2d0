#ifndef ASYNCBO_CAMPAIGN_HPP
#define ASYNCBO_CAMPAIGN_HPP

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include <asyncbo/acquisition.hpp>
#include <asyncbo/buffer_policy.hpp>
#include <asyncbo/errors.hpp>
#include <asyncbo/gp.hpp>
#include <asyncbo/rng.hpp>
#include <asyncbo/tripeak.hpp>

namespace asyncbo {

inline constexpr int kMaxBufferLength = 10;

struct CampaignConfig {
    PolicyKind policy = PolicyKind::Serial;
    int buffer_length = 0;
    int dimension = 2;
    double noise_std = 0.0;
    int budget = 200;
    int init_count = 5;
    std::uint64_t seed = 0;
    AcquisitionConfig acquisition;
    int hyperparameter_restarts = 3;

    void validate() const
    {
        if ((policy == PolicyKind::Serial) != (buffer_length == 0))
            throw std::invalid_argument("the serial policy and only the serial policy has buffer length 0");
        if (buffer_length < 0 || buffer_length > kMaxBufferLength)
            throw std::invalid_argument("buffer length must be in 0..10");
        if (dimension < 1)
            throw std::invalid_argument("dimension must be >= 1");
        if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
            throw std::invalid_argument("noise_std must be finite and >= 0");
        if (init_count < 1)
            throw std::invalid_argument("init_count must be >= 1");
        if (budget <= init_count)
            throw std::invalid_argument("budget must exceed init_count");
        if (hyperparameter_restarts < 0)
            throw std::invalid_argument("hyperparameter_restarts must be >= 0");
        acquisition.validate();
    }
};

/// One completed experiment, in completion order.
struct CompletedExperiment {
    Eigen::VectorXd x;
    double y_observed = 0.0;
    double y_true = 0.0;
    /// f_star minus the best noiseless response among experiments 1..k.
    double loss = 0.0;
    double effective_time = 0.0;
    /// 1-based selection counter at submission.
    int submit_index = 0;

    bool operator==(const CompletedExperiment& o) const
    {
        return x == o.x && y_observed == o.y_observed && y_true == o.y_true && loss == o.loss
               && effective_time == o.effective_time && submit_index == o.submit_index;
    }
};

struct CampaignTrace {
    std::vector<CompletedExperiment> experiments;
    double f_star = 0.0;
    int buffer_length = 0;

    std::size_t size() const noexcept { return experiments.size(); }
    bool operator==(const CampaignTrace&) const = default;
};

/// Wall-clock time of the k-th completion under unit-duration experiments
/// with `buffer_length` concurrent slots (buffer 0 = serial).
inline double effective_time(int k, int buffer_length)
{
    if (k < 1)
        throw std::invalid_argument("effective_time: k must be >= 1");
    if (buffer_length <= 0)
        return static_cast<double>(k);
    return static_cast<double>(k - 1) / buffer_length + 1.0;
}

/// Simple regret after k completions (1-based).
inline double loss_at(const CampaignTrace& trace, int k)
{
    if (k < 1 || k > static_cast<int>(trace.size()))
        throw std::invalid_argument("loss_at: k out of range");
    return trace.experiments[static_cast<std::size_t>(k - 1)].loss;
}

/// Snapshot handed to an observer right after each model fit.
struct RetrainEvent {
    /// Selection about to be made (1-based).
    int selection_index = 0;
    const TrainingSet& training;
    std::size_t real_count = 0;
    std::span<const PendingExperiment> buffer;
    const GPModel& model;
};

using RetrainObserver = std::function<void(const RetrainEvent&)>;

namespace detail {

class CampaignRunner {
public:
    CampaignRunner(const CampaignConfig& cfg, const TriPeakSpec& surrogate)
        : cfg_(cfg),
          spec_(surrogate),
          init_rng_(make_stream(cfg.seed, Stream::Initialization)),
          cand_rng_(make_stream(cfg.seed, Stream::Candidates)),
          fit_rng_(make_stream(cfg.seed, Stream::HyperparameterRestarts)),
          noise_(cfg.noise_std, make_stream(cfg.seed, Stream::Noise)),
          real_(cfg.dimension)
    {
        trace_.f_star = global_optimum(spec_).f_star;
        trace_.buffer_length = cfg.buffer_length;
        trace_.experiments.reserve(static_cast<std::size_t>(cfg.budget));
    }

    CampaignTrace run(const RetrainObserver& observer)
    {
        observer_ = &observer;
        for (int i = 0; i < cfg_.init_count; ++i) {
            ++selections_;
            complete(uniform_point(cfg_.dimension, init_rng_), selections_);
        }
        if (cfg_.buffer_length == 0)
            run_serial();
        else
            run_async();
        return std::move(trace_);
    }

private:
    void run_serial()
    {
        while (selections_ < cfg_.budget) {
            const GPModel model = refit();
            const Eigen::VectorXd x = select(model);
            ++selections_;
            complete(x, selections_);
        }
    }

    void run_async()
    {
        const int capacity = cfg_.buffer_length;
        while (static_cast<int>(buffer_.size()) < capacity && selections_ < cfg_.budget)
            submit(capacity);
        while (!buffer_.empty()) {
            PendingExperiment done = std::move(buffer_.front());
            buffer_.pop_front();
            complete(done.x, done.submit_index);
            if (selections_ < cfg_.budget)
                submit(capacity);
        }
    }

    /// Fit on real data + frozen buffer, select, freeze the new placeholder
    /// at the slot it occupies, enqueue.
    void submit(int capacity)
    {
        const GPModel model = refit();
        const Eigen::VectorXd x = select(model);
        ++selections_;
        const int position = static_cast<int>(buffer_.size()) + 1;
        const double h
            = hallucinate_one(cfg_.policy, model.predict(x), position, capacity, cfg_.acquisition.lambda, floor_);
        buffer_.push_back({x, h, selections_});
    }

    GPModel refit()
    {
        TrainingSet train = real_;
        for (const auto& p : buffer_)
            train.add(p.x, p.hallucinated_y);
        FitOptions options;
        options.random_restarts = cfg_.hyperparameter_restarts;
        options.warm_start = warm_;
        try {
            GPModel model = fit(train, fit_rng_, options);
            warm_ = model.params();
            if (*observer_) {
                const std::vector<PendingExperiment> snapshot(buffer_.begin(), buffer_.end());
                (*observer_)(RetrainEvent{selections_ + 1, model.training(), real_.size(), snapshot, model});
            }
            return model;
        } catch (const NumericalError& e) {
            throw CampaignError(selections_ + 1, e.what());
        }
    }

    Eigen::VectorXd select(const GPModel& model)
    {
        return select_next(model, cfg_.acquisition, cfg_.dimension, cand_rng_);
    }

    void complete(const Eigen::VectorXd& x, int submit_index)
    {
        CompletedExperiment e;
        e.x = x;
        e.y_true = tripeak_true(spec_, x);
        e.y_observed = e.y_true + noise_.draw();
        best_true_ = std::max(best_true_, e.y_true);
        e.loss = std::max(0.0, trace_.f_star - best_true_);
        e.effective_time = effective_time(static_cast<int>(trace_.size()) + 1, cfg_.buffer_length);
        e.submit_index = submit_index;
        real_.add(x, e.y_observed);
        trace_.experiments.push_back(std::move(e));
    }

    const CampaignConfig& cfg_;
    const TriPeakSpec& spec_;
    Rng init_rng_;
    Rng cand_rng_;
    Rng fit_rng_;
    NoiseModel noise_;
    PessimisticFloor floor_{};
    TrainingSet real_;
    std::deque<PendingExperiment> buffer_;
    std::optional<KernelParams> warm_;
    CampaignTrace trace_;
    double best_true_ = -std::numeric_limits<double>::infinity();
    int selections_ = 0;
    const RetrainObserver* observer_ = nullptr;
};

} // namespace detail

/// Simulates one campaign. Serial mode (buffer length 0) fits, selects and
/// observes one experiment at a time. Async mode keeps `buffer_length`
/// experiments in flight with FIFO completion; each new selection is made
/// on a model trained on the real data plus the frozen placeholders of the
/// pending experiments.
///
/// Random streams (initial design, candidates, noise, hyperparameter
/// restarts) are derived from cfg.seed, so campaigns with the same seed and
/// dimension share their initial design.
inline CampaignTrace run_campaign(const CampaignConfig& cfg, const TriPeakSpec& surrogate,
                                  const RetrainObserver& observer = {})
{
    cfg.validate();
    if (surrogate.dimension() != cfg.dimension)
        throw std::invalid_argument("surrogate dimension does not match campaign dimension");
    if (surrogate.noise_std() != cfg.noise_std)
        throw std::invalid_argument("surrogate noise does not match campaign noise");
    return detail::CampaignRunner(cfg, surrogate).run(observer);
}

/// Replays the selections of `trace` against a fresh noise stream. Only the
/// observed responses change; losses are recomputed from the noiseless
/// ground truth.
inline CampaignTrace renoise(const CampaignTrace& trace, const TriPeakSpec& surrogate, NoiseModel& noise)
{
    CampaignTrace out = trace;
    double best = -std::numeric_limits<double>::infinity();
    for (auto& e : out.experiments) {
        e.y_true = tripeak_true(surrogate, e.x);
        e.y_observed = e.y_true + noise.draw();
        best = std::max(best, e.y_true);
        e.loss = std::max(0.0, out.f_star - best);
    }
    return out;
}

} // namespace asyncbo

#endif
