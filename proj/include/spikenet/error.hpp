#pragma once

#include <stdexcept>
#include <string>

namespace spikenet {

// Failure classes surfaced by the library. The CLI maps each class to an exit
// code (input 2, format 3, numeric 4).

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spikenet
