#pragma once

#include <stdexcept>
#include <string>

namespace modesel {

/// Input violates an operation's precondition (nonpositive priority, length mismatch, ...).
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// AHP consistency only has random-index values for matrices of order 3 and 4.
class unsupported_order : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class dimension_mismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class calibration_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class insufficient_runs : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace modesel
