#pragma once

#include <stdexcept>
#include <string>

namespace kprobe {

/// Malformed model description, configuration or command parameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A momentum point lies outside the corner domain, on its boundary where an
/// interior value is required, or outside a factor's admissible level range.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Non-convergence, singular linear systems, failed difference steps.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double previous, double last)
        : NumericalError(what), previous_(previous), last_(last) {}

    double previous_estimate() const noexcept { return previous_; }
    double last_estimate() const noexcept { return last_; }

private:
    double previous_;
    double last_;
};

}  // namespace kprobe
