#ifndef ASYNCBO_AGGREGATE_HPP
#define ASYNCBO_AGGREGATE_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <asyncbo/buffer_policy.hpp>
#include <asyncbo/campaign.hpp>

namespace asyncbo {

/// Identifies one grid cell of a suite.
struct CellKey {
    PolicyKind policy = PolicyKind::Serial;
    int buffer_length = 0;
    int dimension = 2;
    double noise_std = 0.0;

    /// Sort order used for CSV rows: policy name, buffer, dimension, noise.
    friend bool operator<(const CellKey& a, const CellKey& b)
    {
        return std::tuple(to_string(a.policy), a.buffer_length, a.dimension, a.noise_std)
               < std::tuple(to_string(b.policy), b.buffer_length, b.dimension, b.noise_std);
    }
    bool operator==(const CellKey&) const = default;
};

inline std::string cell_label(const CellKey& key)
{
    std::string s(to_string(key.policy));
    if (key.policy != PolicyKind::Serial)
        s += "@" + std::to_string(key.buffer_length);
    return s;
}

/// Median / quartile loss curves of one cell, indexed by experiment k-1.
struct AggregateCurves {
    CellKey key;
    std::vector<double> effective_time;
    std::vector<double> median_loss;
    std::vector<double> q25;
    std::vector<double> q75;

    std::size_t size() const noexcept { return median_loss.size(); }
    double iqr(std::size_t i) const { return q75.at(i) - q25.at(i); }
    bool operator==(const AggregateCurves&) const = default;
};

/// Quantile of already-sorted data by linear interpolation between order
/// statistics: position h = (n - 1) p.
inline double sorted_quantile(std::span<const double> sorted, double p)
{
    if (sorted.empty())
        throw std::invalid_argument("quantile of empty sample");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("quantile probability must lie in [0,1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline AggregateCurves aggregate(std::span<const CampaignTrace> traces, const CellKey& key = {})
{
    if (traces.size() < 2)
        throw std::invalid_argument("aggregate needs at least two traces");
    const std::size_t budget = traces.front().size();
    for (const auto& t : traces)
        if (t.size() != budget)
            throw std::invalid_argument("aggregate: traces have different lengths");

    AggregateCurves out;
    out.key = key;
    out.effective_time.resize(budget);
    out.median_loss.resize(budget);
    out.q25.resize(budget);
    out.q75.resize(budget);
    std::vector<double> column(traces.size());
    for (std::size_t k = 0; k < budget; ++k) {
        for (std::size_t r = 0; r < traces.size(); ++r)
            column[r] = traces[r].experiments[k].loss;
        std::sort(column.begin(), column.end());
        out.median_loss[k] = sorted_quantile(column, 0.5);
        out.q25[k] = sorted_quantile(column, 0.25);
        out.q75[k] = sorted_quantile(column, 0.75);
        out.effective_time[k] = traces.front().experiments[k].effective_time;
    }
    return out;
}

/// Smallest effective time at which the median loss is <= target, or
/// infinity if never reached.
inline double time_to_reach(const AggregateCurves& curves, double target)
{
    for (std::size_t k = 0; k < curves.size(); ++k)
        if (curves.median_loss[k] <= target)
            return curves.effective_time[k];
    return std::numeric_limits<double>::infinity();
}

} // namespace asyncbo

#endif
