#pragma once

#include <stdexcept>
#include <string>

namespace nbfec {

// Invalid parameter combinations (bad rates, incompatible channels, ...).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed files (constellation specs, measurement databases, presets).
struct FormatError : std::runtime_error {
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Out-of-range or inconsistent runtime inputs.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nbfec
