#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace buchi_dp {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class PolicyInvalid : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// B ∪ ¬B_{T,A} is empty: the whole chain is rejecting BSCCs.
class EmptySystem : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class NoTransitions : public Error {
 public:
  using Error::Error;
};

// ‖H^{n'+1}‖∞ exceeded 1-(1-γ_B)ε^{n'}. Always a bug, never a data problem.
class CertificateViolation : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

// Parse failures carry a 1-based source location (column 0 = whole line).
class ParseError : public Error {
 public:
  ParseError(const std::string& kind, std::size_t line, std::size_t column,
             const std::string& message)
      : Error(format(kind, line, column, message)),
        line_(line),
        column_(column),
        message_(message) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(const std::string& kind, std::size_t line,
                            std::size_t column, const std::string& message) {
    std::string out = kind;
    if (line > 0) {
      out += " at line " + std::to_string(line);
      if (column > 0) out += ", column " + std::to_string(column);
    }
    return out + ": " + message;
  }

  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

class SyntaxError : public ParseError {
 public:
  SyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : ParseError("syntax error", line, column, message) {}
};

class SemanticError : public ParseError {
 public:
  SemanticError(std::size_t line, std::size_t column, const std::string& message)
      : ParseError("semantic error", line, column, message) {}
};

}  // namespace buchi_dp
