#pragma once

#include <stdexcept>
#include <string>

namespace minsum {

// Error taxonomy mapped to process exit codes by the CLI:
//   ConfigError -> 2, DataError -> 3, NumericError / ContractError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (bad keys, bad values, bad flags).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (parse, schema, integrity, lookup).
class DataError : public Error {
 public:
  using Error::Error;
};

// Numeric failure: degenerate inputs, zero vectors, non-finite values.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Violated API precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace minsum
