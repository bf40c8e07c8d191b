#pragma once

#include <stdexcept>
#include <string>

namespace qlm {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The observable has zero magnitude so its eigendirection is undefined.
class DegenerateObservableError : public DomainError {
public:
    DegenerateObservableError() : DomainError("degenerate observable: omega_rate = 0, direction undefined") {}
};

/// A branch with vanishing weight (zero Born probability or zero trace).
class DegenerateBranchError : public DomainError {
public:
    using DomainError::DomainError;
};

/// The Theta-chart divides by sin(alpha); it cannot be used at the poles.
class ChartSingularityError : public DomainError {
public:
    ChartSingularityError() : DomainError("Theta chart is singular at sin(alpha) = 0; use the (theta, phi) polar chart") {}
};

/// Raw (non log-domain) evaluation would overflow.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

}  // namespace qlm
