#pragma once

#include <stdexcept>
#include <string>

namespace fairgraph {

// Error taxonomy mapped to CLI exit codes: config -> 2, data -> 3, numeric -> 4.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape/contract violations inside the numeric engine.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite loss or other numeric breakdown during training.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fairgraph
