#ifndef TRIWELL_COMMON_HPP
#define TRIWELL_COMMON_HPP

#include <stdexcept>
#include <string>

namespace triwell {

inline constexpr const char* kVersion = "0.1.0";

// Error hierarchy. The CLI maps each category to a distinct exit code.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct scenario_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Raised when a requested depth/hopping combination cannot be realised.
struct calibration_error : config_error {
    using config_error::config_error;
};
// Raised when a state cannot be represented in the target basis (leakage).
struct representation_error : numerical_error {
    using numerical_error::numerical_error;
};

}  // namespace triwell

#endif
