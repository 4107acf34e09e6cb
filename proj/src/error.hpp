// Copyright 2026 The olp authors
// SPDX-License-Identifier: Apache-2.0

#ifndef OLP_ERROR_HPP_
#define OLP_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace olp {

// Base for all library errors. The C API maps these onto olp_status codes,
// the CLI onto exit codes (usage/data/io -> 2, anything else -> 1).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments, unknown names, out-of-range config values.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (bad rows, id mismatches, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Filesystem problems: missing inputs, unwritable outputs.
class IoError : public Error {
 public:
  using Error::Error;
};

// Invariant violations inside the library itself.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace olp

#endif  // OLP_ERROR_HPP_
