#pragma once

#include <stdexcept>
#include <string>

namespace singpot {

/// Invalid model description: bad quadrature sizes, malformed config files,
/// dependent constraint functions.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was called outside its domain (e.g. a moment vector that is
/// not interior to the moment set).
class PreconditionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// An iterative method failed to reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal consistency violation (should not happen for valid input).
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace singpot
