#include <optional>

#include <gtest/gtest.h>

#include <asyncbo/campaign.hpp>

using namespace asyncbo;

namespace {

CampaignConfig quick(PolicyKind policy, int buffer, std::uint64_t seed = 1, double noise = 0.0)
{
    CampaignConfig c;
    c.policy = policy;
    c.buffer_length = buffer;
    c.dimension = 2;
    c.noise_std = noise;
    c.budget = 24;
    c.seed = seed;
    c.acquisition.candidate_count = 128;
    return c;
}

CampaignTrace run(const CampaignConfig& c, const RetrainObserver& obs = {})
{
    return run_campaign(c, TriPeakSpec(c.dimension, c.noise_std), obs);
}

} // namespace

TEST(EffectiveTime, Formula)
{
    EXPECT_EQ(effective_time(1, 0), 1.0);
    EXPECT_EQ(effective_time(7, 0), 7.0);
    EXPECT_EQ(effective_time(1, 4), 1.0);
    EXPECT_EQ(effective_time(5, 4), 2.0);
    EXPECT_EQ(effective_time(200, 9), 199.0 / 9.0 + 1.0);
    EXPECT_THROW(effective_time(0, 2), std::invalid_argument);
}

TEST(Validation, RejectsBadConfigs)
{
    EXPECT_THROW(run(quick(PolicyKind::Serial, 4)), std::invalid_argument);
    EXPECT_THROW(run(quick(PolicyKind::Pessimistic, 0)), std::invalid_argument);
    EXPECT_THROW(run(quick(PolicyKind::Greedy, 11)), std::invalid_argument);
    CampaignConfig c = quick(PolicyKind::Serial, 0);
    c.budget = c.init_count;
    EXPECT_THROW(run(c), std::invalid_argument);
    c = quick(PolicyKind::Serial, 0);
    EXPECT_THROW(run_campaign(c, TriPeakSpec(3)), std::invalid_argument);
    EXPECT_THROW(run_campaign(c, TriPeakSpec(2, 0.01)), std::invalid_argument);
}

TEST(Trace, ShapeAndLoss)
{
    for (auto [policy, buffer] : {std::pair{PolicyKind::Serial, 0}, std::pair{PolicyKind::Pessimistic, 3},
                                  std::pair{PolicyKind::LCBLiar, 1}}) {
        const CampaignConfig c = quick(policy, buffer);
        const CampaignTrace t = run(c);
        const TriPeakSpec spec(2);
        ASSERT_EQ(t.size(), static_cast<std::size_t>(c.budget));
        EXPECT_EQ(t.buffer_length, buffer);
        EXPECT_DOUBLE_EQ(t.f_star, global_optimum(spec).f_star);
        double best = -1.0;
        for (int k = 1; k <= c.budget; ++k) {
            const auto& e = t.experiments[static_cast<std::size_t>(k - 1)];
            EXPECT_EQ(e.y_true, tripeak_true(spec, e.x));
            EXPECT_EQ(e.y_observed, e.y_true);
            best = std::max(best, e.y_true);
            EXPECT_DOUBLE_EQ(e.loss, t.f_star - best);
            EXPECT_GE(e.loss, 0.0);
            EXPECT_EQ(e.effective_time, effective_time(k, buffer));
            EXPECT_EQ(e.submit_index, k);
            EXPECT_EQ(loss_at(t, k), e.loss);
            if (k > 1)
                EXPECT_LE(e.loss, t.experiments[static_cast<std::size_t>(k - 2)].loss);
        }
        EXPECT_THROW(loss_at(t, 0), std::invalid_argument);
        EXPECT_THROW(loss_at(t, c.budget + 1), std::invalid_argument);
    }
}

TEST(Trace, DeterministicForSeed)
{
    const CampaignConfig c = quick(PolicyKind::AscendingPessimism, 3, 9, 0.02);
    EXPECT_EQ(run(c), run(c));
    const CampaignConfig other = quick(PolicyKind::AscendingPessimism, 3, 10, 0.02);
    EXPECT_FALSE(run(c) == run(other));
}

TEST(Trace, InitialDesignIsPairedAcrossPolicies)
{
    const CampaignTrace serial = run(quick(PolicyKind::Serial, 0, 4));
    const CampaignTrace greedy = run(quick(PolicyKind::Greedy, 5, 4));
    const CampaignTrace noisy = run(quick(PolicyKind::Pessimistic, 2, 4, 0.05));
    for (int i = 0; i < 5; ++i) {
        EXPECT_EQ(serial.experiments[i].x, greedy.experiments[i].x);
        EXPECT_EQ(serial.experiments[i].x, noisy.experiments[i].x);
    }
}

TEST(Trace, SelectionsStayInDomain)
{
    const CampaignTrace t = run(quick(PolicyKind::DescendingPessimism, 4, 2));
    for (const auto& e : t.experiments) {
        EXPECT_GE(e.x.minCoeff(), 0.0);
        EXPECT_LE(e.x.maxCoeff(), 1.0);
    }
}

TEST(Observer, SerialSeesOnlyRealData)
{
    int events = 0;
    const CampaignConfig c = quick(PolicyKind::Serial, 0);
    run(c, [&](const RetrainEvent& ev) {
        ++events;
        EXPECT_TRUE(ev.buffer.empty());
        EXPECT_EQ(ev.training.size(), ev.real_count);
        EXPECT_EQ(ev.real_count, static_cast<std::size_t>(ev.selection_index - 1));
    });
    EXPECT_EQ(events, c.budget - c.init_count);
}

TEST(Observer, PessimisticBufferHoldsZerosAtPendingInputs)
{
    const CampaignConfig c = quick(PolicyKind::Pessimistic, 4);
    int events = 0;
    std::size_t max_occupancy = 0;
    const CampaignTrace t = run(c, [&](const RetrainEvent& ev) {
        ++events;
        max_occupancy = std::max(max_occupancy, ev.buffer.size());
        ASSERT_EQ(ev.training.size(), ev.real_count + ev.buffer.size());
        ASSERT_LT(ev.buffer.size(), 4u);
        for (std::size_t j = 0; j < ev.buffer.size(); ++j) {
            EXPECT_EQ(ev.buffer[j].hallucinated_y, 0.0);
            EXPECT_EQ(ev.training.responses()[ev.real_count + j], 0.0);
            EXPECT_EQ(ev.training.inputs()[ev.real_count + j], ev.buffer[j].x);
            if (j)
                EXPECT_EQ(ev.buffer[j].submit_index, ev.buffer[j - 1].submit_index + 1);
        }
        // Real data plus pending always accounts for every earlier selection.
        EXPECT_EQ(ev.real_count + ev.buffer.size(), static_cast<std::size_t>(ev.selection_index - 1));
    });
    EXPECT_EQ(events, c.budget - c.init_count);
    EXPECT_EQ(max_occupancy, 3u);
    for (int k = 1; k <= c.budget; ++k)
        EXPECT_EQ(t.experiments[static_cast<std::size_t>(k - 1)].submit_index, k);
}

TEST(Observer, PlaceholdersAreFrozenAtAssignment)
{
    // Each new buffer entry equals the policy value computed from the model
    // that selected it, at the slot it took, and never changes afterwards.
    for (PolicyKind policy : {PolicyKind::Greedy, PolicyKind::AscendingPessimism, PolicyKind::DescendingPessimism,
                              PolicyKind::LCBLiar}) {
        const int n = 3;
        const CampaignConfig c = quick(policy, n, 6);
        std::optional<GPModel> prev;
        std::size_t prev_occupancy = 0;
        std::map<int, double> frozen;
        int checked = 0;
        run(c, [&](const RetrainEvent& ev) {
            for (const auto& p : ev.buffer) {
                const auto it = frozen.find(p.submit_index);
                if (it != frozen.end()) {
                    EXPECT_EQ(it->second, p.hallucinated_y);
                    continue;
                }
                ASSERT_TRUE(prev.has_value());
                ASSERT_EQ(p.submit_index, ev.selection_index - 1);
                const int position = static_cast<int>(prev_occupancy) + 1;
                const double want = hallucinate_one(policy, prev->predict(p.x), position, n, kDefaultLambda);
                EXPECT_EQ(p.hallucinated_y, want);
                frozen[p.submit_index] = p.hallucinated_y;
                ++checked;
            }
            prev = ev.model;
            prev_occupancy = ev.buffer.size();
        });
        EXPECT_GE(checked, c.budget - c.init_count - n);
    }
}

TEST(Observer, AscendingSteadyStateSlotIsFullyPessimistic)
{
    const int n = 4;
    const CampaignConfig c = quick(PolicyKind::AscendingPessimism, n, 3);
    run(c, [&](const RetrainEvent& ev) {
        // The fill phase assigns slots 1..n; afterwards every new entry takes
        // slot n, whose ascending coefficient is 0.
        for (const auto& p : ev.buffer)
            if (p.submit_index > c.init_count + n)
                EXPECT_EQ(p.hallucinated_y, 0.0);
    });
}

TEST(Renoise, LossIsInvariant)
{
    const CampaignConfig c = quick(PolicyKind::Pessimistic, 2, 5, 0.05);
    const TriPeakSpec spec(2, 0.05);
    const CampaignTrace t = run(c);
    NoiseModel fresh(0.05, std::uint64_t{12345});
    const CampaignTrace r = renoise(t, spec, fresh);
    ASSERT_EQ(r.size(), t.size());
    int differing = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_EQ(r.experiments[i].x, t.experiments[i].x);
        EXPECT_EQ(r.experiments[i].loss, t.experiments[i].loss);
        EXPECT_EQ(r.experiments[i].y_true, t.experiments[i].y_true);
        differing += r.experiments[i].y_observed != t.experiments[i].y_observed;
    }
    EXPECT_EQ(differing, static_cast<int>(t.size()));
}

TEST(Renoise, NoisyObservationsDifferFromTruth)
{
    const CampaignTrace t = run(quick(PolicyKind::Serial, 0, 2, 0.02));
    double sq = 0.0;
    for (const auto& e : t.experiments)
        sq += (e.y_observed - e.y_true) * (e.y_observed - e.y_true);
    EXPECT_GT(sq, 0.0);
    EXPECT_LT(std::sqrt(sq / static_cast<double>(t.size())), 0.05);
}
