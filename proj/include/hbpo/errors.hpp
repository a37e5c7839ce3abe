#pragma once

#include <stdexcept>
#include <string>

namespace hbpo {

// Raised for invalid configuration values; the message names the offending
// field path (e.g. "trainer.learning_rate"). Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed batches handed to the advantage computation.
class BatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for non-finite values reaching a numeric kernel.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hbpo
