#pragma once

#include <stdexcept>
#include <string>

namespace rough {

// The parametrization carries no information about the requested target,
// e.g. a roughness bound for a distribution with sigma = 0.
struct singular_parametrization_error : std::domain_error {
    explicit singular_parametrization_error(const std::string& msg) : std::domain_error(msg) {}
};

// An estimator cannot produce a value for this channel/target combination
// (distinct from invalid inputs, which raise std::invalid_argument).
struct estimator_error : std::runtime_error {
    explicit estimator_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rough
