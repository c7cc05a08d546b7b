#pragma once

#include <stdexcept>
#include <string>

namespace fnmt {

// Base of all toolkit errors. The CLI maps IoError to exit code 2 and every
// other subclass to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by a single value (empty token, id out of range, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Malformed file content or mismatched parallel streams.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Operation sequence that cannot be executed by the interpreter.
class IllFormedProgram : public Error {
 public:
  IllFormedProgram(std::size_t op_index, const std::string& what)
      : Error("op " + std::to_string(op_index) + ": " + what),
        op_index_(op_index) {}
  std::size_t op_index() const { return op_index_; }

 private:
  std::size_t op_index_;
};

// A value exceeds a fixed capacity (SRC_POP run longer than the pop vocabulary).
class CapacityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace fnmt
