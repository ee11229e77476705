#pragma once

#include <stdexcept>
#include <string>

namespace coopfe {

// Error hierarchy used across the library.  The CLI maps each family to a
// distinct process exit code, so throw the most specific type that applies:
//
//   SchemaError / DataError  -> exit 3  (missing or malformed input data)
//   ConfigError              -> exit 4  (invalid configuration value)
//   NumericalError           -> exit 5  (numerical failure, e.g. singular fit)

class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a least-squares system is singular and no regularisation was
// requested; the message suggests the fix (a positive ridge term).
class SingularFitError : public NumericalError {
 public:
  explicit SingularFitError(const std::string& what) : NumericalError(what) {}
};

}  // namespace coopfe
