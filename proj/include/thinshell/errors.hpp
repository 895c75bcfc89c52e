#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thinshell {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by jet/expression evaluation. Carries the source offset of the AST
// node that failed once the expression evaluator has annotated it.
class EvaluationError : public Error {
 public:
  explicit EvaluationError(const std::string& what,
                           std::optional<std::size_t> offset = std::nullopt)
      : Error(offset ? what + " (at offset " + std::to_string(*offset) + ")"
                     : what),
        offset_(offset) {}

  std::optional<std::size_t> offset() const { return offset_; }

 private:
  std::optional<std::size_t> offset_;
};

class DomainError : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

class DivisionByZero : public EvaluationError {
 public:
  using EvaluationError::EvaluationError;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t offset,
              std::vector<std::string> expected)
      : Error(format(message, offset, expected)),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string format(const std::string& message, std::size_t offset,
                            const std::vector<std::string>& expected) {
    std::string s = "syntax error at offset " + std::to_string(offset) + ": " +
                    message;
    if (!expected.empty()) {
      s += " (expected one of:";
      for (const auto& e : expected) s += " " + e;
      s += ")";
    }
    return s;
  }

  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnboundVariable : public Error {
 public:
  UnboundVariable(std::string name, std::size_t offset)
      : Error("unbound variable '" + name + "' at offset " +
              std::to_string(offset)),
        name_(std::move(name)),
        offset_(offset) {}

  const std::string& name() const { return name_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

class DegenerateImmersion : public Error {
 public:
  using Error::Error;
};

// The offset surface X + rN stops being an immersion (|r| beyond the focal
// distance).
class FocalDegeneracy : public Error {
 public:
  using Error::Error;
};

// Two independent routes to the same quantity disagree beyond tolerance.
class ConsistencyFailure : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class OutsideTube : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::string pointer)
      : Error("config error at '" + pointer + "': " + message),
        pointer_(std::move(pointer)) {}

  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

}  // namespace thinshell
