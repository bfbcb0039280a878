#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace chronoreg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: malformed grid, exponent, config value, or violated precondition.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A computation failed to converge or produced non-finite values.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Warnings go through a replaceable sink; the default writes to stderr.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace chronoreg
