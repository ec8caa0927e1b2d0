// Runs one pessimistic asynchronous campaign and one serial campaign on the
// 3-D TriPeak surface and prints their loss every 20 experiments.

#include <cstdio>

#include <asyncbo/campaign.hpp>

int main()
{
    using namespace asyncbo;
    const TriPeakSpec surface(3);

    CampaignConfig serial;
    serial.dimension = 3;
    serial.budget = 100;
    serial.seed = 7;

    CampaignConfig async = serial;
    async.policy = PolicyKind::Pessimistic;
    async.buffer_length = 4;

    const CampaignTrace a = run_campaign(serial, surface);
    const CampaignTrace b = run_campaign(async, surface);

    std::printf("f* = %.6f\n", a.f_star);
    std::printf("%5s %12s %12s %10s\n", "k", "serial loss", "async loss", "async t");
    for (int k = 20; k <= serial.budget; k += 20)
        std::printf("%5d %12.3e %12.3e %10.2f\n", k, loss_at(a, k), loss_at(b, k),
                    b.experiments[static_cast<std::size_t>(k - 1)].effective_time);
}
