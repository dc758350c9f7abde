// SPDX-License-Identifier: Apache-2.0
//
// irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace irsfd {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (counts, powers, file contents).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A channel block or solver vector whose shape does not match the config.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown inside a solver (singular system, failed bracket).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace irsfd
