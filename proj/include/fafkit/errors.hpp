#pragma once

#include <stdexcept>
#include <string>

namespace faf {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense-representation size cap exceeded (state too large for this backend).
struct SizeError : Error {
  using Error::Error;
};

/// A documented precondition was violated by the caller.
struct ContractError : Error {
  using Error::Error;
};

}  // namespace faf
