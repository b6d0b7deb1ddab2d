#pragma once

#include <stdexcept>
#include <string>

namespace udp {

// Domain failure: bad input data, violated invariant, size cap exceeded.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed user-facing syntax (family strings, block specs, flag values).
class UsageError : public Error {
public:
  using Error::Error;
};

} // namespace udp
