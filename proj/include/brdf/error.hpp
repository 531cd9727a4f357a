#pragma once

#include <stdexcept>
#include <string>

namespace brdf {

// File system and parse failures. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or arguments. The CLI maps these to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A metric or model could not be computed. The CLI maps these to exit code 1.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace brdf
