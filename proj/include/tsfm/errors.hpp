#pragma once

#include <stdexcept>
#include <string>

namespace tsfm {

// Error categories map to CLI exit codes: config=2, data=3, numeric=4, contract=5.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 1; }
  virtual const char* category() const { return "error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
  const char* category() const override { return "config"; }
};

class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
  const char* category() const override { return "data"; }
};

class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
  const char* category() const override { return "numeric"; }
};

// Shape mismatches, out-of-range windows, violated preconditions.
class ContractError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 5; }
  const char* category() const override { return "contract"; }
};

}  // namespace tsfm
