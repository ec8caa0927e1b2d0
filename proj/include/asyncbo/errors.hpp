#ifndef ASYNCBO_ERRORS_HPP
#define ASYNCBO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace asyncbo {

/// Raised when a covariance matrix cannot be factored or a linear-algebra
/// routine produces a non-finite result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a caller breaks a documented precondition that is a logic
/// bug rather than bad input (e.g. asking the serial policy to hallucinate).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A campaign aborted; carries the 1-based index of the experiment that was
/// being selected when the failure happened.
class CampaignError : public std::runtime_error {
public:
    CampaignError(int experiment_index, const std::string& what)
        : std::runtime_error("campaign aborted at experiment " + std::to_string(experiment_index) + ": " + what),
          experiment_index_(experiment_index)
    {
    }

    int experiment_index() const noexcept { return experiment_index_; }

private:
    int experiment_index_;
};

} // namespace asyncbo

#endif
