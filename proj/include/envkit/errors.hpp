// Copyright (c) 2026 envkit developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

namespace envkit {

/// Raised when an input fails a structural validation check (wrong
/// dimensions, non-normalized state, non-density matrix, malformed
/// scenario, ...).  The CLI maps this to exit code 3.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a mathematically expected identity fails its numerical
/// certification (residual above tolerance).  The CLI maps this to exit
/// code 2.
class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace envkit
