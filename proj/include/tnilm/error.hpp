#pragma once

#include <stdexcept>
#include <string>

namespace tnilm {

/// Bad input: malformed files, invalid configuration, model/class mismatch.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while simulating or fitting a valid model.
class InferenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tnilm
