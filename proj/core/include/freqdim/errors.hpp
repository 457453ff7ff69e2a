#pragma once
#include <stdexcept>

namespace freqdim {

// The tool maps these to exit codes: ConfigError -> 1, ValidationError -> 2,
// ResourceCapError -> 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace freqdim
