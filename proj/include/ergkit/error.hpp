#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ergkit {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ArithmeticError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class CompileError : public Error {
 public:
  using Error::Error;
};

class UndefinedInputError : public Error {
 public:
  using Error::Error;
};

// Synthesis / judging protocol failures.
class LeakageError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Gateway failures.
class TransportError : public Error {
 public:
  using Error::Error;
};

class CredentialError : public Error {
 public:
  using Error::Error;
};

class ReplayMissError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed line-oriented input. `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ergkit
