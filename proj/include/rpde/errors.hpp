#pragma once

#include <stdexcept>
#include <string>

namespace rpde {

// Precondition violated by the caller (bad sizes, out-of-range parameters).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (e.g. Gamma at z <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Result would leave the representable range (series overflow, unsafe moments).
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

// Configuration file missing, malformed, or failing cross-checks.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical breakdown detected at run time (blow-up, non-convergent series).
class NumericalDiagnostic : public std::runtime_error {
public:
    NumericalDiagnostic(const std::string& what, double at_time)
        : std::runtime_error(what), time_(at_time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace rpde
