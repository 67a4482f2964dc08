#pragma once

#include <stdexcept>
#include <string>

namespace scoredyn {

enum class ErrorKind {
  invalid_args,
  numeric_accuracy,
  blow_up,
  step_size_underflow,
  not_found,
  ill_conditioned,
  parse,
};

const char* to_string(ErrorKind kind) noexcept;

// Base class for every error raised by the library. Carries a machine-readable
// kind so the runner can map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidArgs : public Error {
 public:
  explicit InvalidArgs(const std::string& what)
      : Error(ErrorKind::invalid_args, what) {}
};

class NumericAccuracy : public Error {
 public:
  explicit NumericAccuracy(const std::string& what)
      : Error(ErrorKind::numeric_accuracy, what) {}
};

class BlowUp : public Error {
 public:
  explicit BlowUp(const std::string& what) : Error(ErrorKind::blow_up, what) {}
};

class StepSizeUnderflow : public Error {
 public:
  explicit StepSizeUnderflow(const std::string& what)
      : Error(ErrorKind::step_size_underflow, what) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& what)
      : Error(ErrorKind::not_found, what) {}
};

class IllConditioned : public Error {
 public:
  explicit IllConditioned(const std::string& what)
      : Error(ErrorKind::ill_conditioned, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_args: return "invalid-args";
    case ErrorKind::numeric_accuracy: return "numeric-accuracy";
    case ErrorKind::blow_up: return "blow-up";
    case ErrorKind::step_size_underflow: return "step-size-underflow";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::ill_conditioned: return "ill-conditioned";
    case ErrorKind::parse: return "parse";
  }
  return "unknown";
}

}  // namespace scoredyn
