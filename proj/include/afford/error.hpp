#pragma once

#include <stdexcept>
#include <string>

namespace afford {

// Error categories map to CLI exit codes: 1 usage, 2 data validation,
// 3 numeric failure.
class Error : public std::runtime_error {
 public:
  Error(int exit_code, const std::string& what)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(1, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(2, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(3, what) {}
};

}  // namespace afford
