#pragma once

#include <stdexcept>
#include <string>

namespace mep {

/// Malformed or inconsistent input data (files, rows, model text).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or an incompatible combination of settings.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace mep
