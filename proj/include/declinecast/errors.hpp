#pragma once

#include <stdexcept>
#include <string>

namespace declinecast {

// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Optimizer or numerical failure (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or caller-side misuse (CLI exit code 1).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace declinecast
