#pragma once
#include <stdexcept>
#include <string>

namespace fluxline {

// invalid physical or numerical parameters (CLI maps these to exit code 2)
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// config schema violations; path identifies the offending field
struct ConfigError : std::runtime_error {
    std::string path;
    ConfigError(std::string field_path, const std::string& msg)
        : std::runtime_error(field_path + ": " + msg), path(std::move(field_path)) {}
};

// runtime numerical failures (CLI maps these to exit code 3)
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fluxline
