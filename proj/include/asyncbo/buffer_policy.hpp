#ifndef ASYNCBO_BUFFER_POLICY_HPP
#define ASYNCBO_BUFFER_POLICY_HPP

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include <asyncbo/acquisition.hpp>
#include <asyncbo/errors.hpp>
#include <asyncbo/gp.hpp>

namespace asyncbo {

enum class PolicyKind { Serial, Greedy, Pessimistic, AscendingPessimism, DescendingPessimism, LCBLiar };

inline constexpr std::array<PolicyKind, 6> kAllPolicies{PolicyKind::Serial,
                                                        PolicyKind::Greedy,
                                                        PolicyKind::Pessimistic,
                                                        PolicyKind::AscendingPessimism,
                                                        PolicyKind::DescendingPessimism,
                                                        PolicyKind::LCBLiar};

inline constexpr std::string_view to_string(PolicyKind p)
{
    switch (p) {
    case PolicyKind::Serial: return "serial";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Pessimistic: return "pessimistic";
    case PolicyKind::AscendingPessimism: return "asc-pessimism";
    case PolicyKind::DescendingPessimism: return "desc-pessimism";
    case PolicyKind::LCBLiar: return "lcb-liar";
    }
    return "unknown";
}

inline std::optional<PolicyKind> parse_policy(std::string_view name)
{
    for (PolicyKind p : kAllPolicies)
        if (to_string(p) == name)
            return p;
    return std::nullopt;
}

/// Known lower bound of the response range (0 for TriPeak).
struct PessimisticFloor {
    double value = 0.0;
};

/// An in-flight experiment with its frozen placeholder response.
struct PendingExperiment {
    Eigen::VectorXd x;
    double hallucinated_y = 0.0;
    int submit_index = 0;
};

/// Multiplier applied to y'(x_j) by the graded policies, for FIFO position
/// j in 1..capacity:
///   ascending:  (capacity - j) / capacity
///   descending: (j - 1) / capacity
inline double pessimism_coefficient(PolicyKind policy, int position, int capacity)
{
    if (capacity < 1 || position < 1 || position > capacity)
        throw std::invalid_argument("buffer position must lie in 1..capacity");
    const double n = capacity;
    switch (policy) {
    case PolicyKind::AscendingPessimism: return (n - position) / n;
    case PolicyKind::DescendingPessimism: return (position - 1) / n;
    default: throw std::invalid_argument("pessimism_coefficient: only defined for graded pessimism policies");
    }
}

/// Placeholder for a single buffer slot given the model prediction there.
inline double hallucinate_one(PolicyKind policy, const Prediction& pred, int position, int capacity, double lambda,
                              PessimisticFloor floor = {})
{
    switch (policy) {
    case PolicyKind::Serial:
        throw ContractViolation("serial policy never produces hallucinated responses");
    case PolicyKind::Greedy: return pred.mean;
    case PolicyKind::Pessimistic: return floor.value;
    case PolicyKind::AscendingPessimism:
    case PolicyKind::DescendingPessimism: return pessimism_coefficient(policy, position, capacity) * pred.mean;
    case PolicyKind::LCBLiar: return lcb_score(pred.mean, pred.std, lambda);
    }
    throw std::invalid_argument("unknown policy");
}

/// Placeholder responses for `pending` (FIFO order, oldest first). Position
/// coefficients use `capacity` as N; capacity 0 means pending.size().
inline std::vector<double> hallucinate(PolicyKind policy, const GPModel& model, std::span<const Eigen::VectorXd> pending,
                                       double lambda, PessimisticFloor floor = {}, int capacity = 0)
{
    if (policy == PolicyKind::Serial)
        throw ContractViolation("serial policy never produces hallucinated responses");
    if (pending.empty())
        throw std::invalid_argument("hallucinate: pending list is empty");
    const int n = capacity > 0 ? capacity : static_cast<int>(pending.size());
    if (static_cast<int>(pending.size()) > n)
        throw std::invalid_argument("hallucinate: more pending experiments than buffer capacity");

    const std::vector<Prediction> preds = model.predict(pending);
    std::vector<double> out(pending.size());
    for (std::size_t j = 0; j < pending.size(); ++j)
        out[j] = hallucinate_one(policy, preds[j], static_cast<int>(j) + 1, n, lambda, floor);
    return out;
}

} // namespace asyncbo

#endif
