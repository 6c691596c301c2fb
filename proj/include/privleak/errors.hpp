#pragma once

#include <stdexcept>
#include <string>

namespace privleak {

/** Base of every exception thrown by the toolkit. `kind()` is the stable tag used in CLI error lines. */
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

/// Numerical failures (CLI exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Bad input data or configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

#define PRIVLEAK_DEFINE_ERROR(Name, Base)                              \
  class Name : public Base {                                           \
   public:                                                             \
    explicit Name(const std::string& what) : Base(#Name, what) {}      \
  };

PRIVLEAK_DEFINE_ERROR(NotPositiveDefinite, NumericalError)
PRIVLEAK_DEFINE_ERROR(NotSymmetric, NumericalError)
PRIVLEAK_DEFINE_ERROR(Singular, NumericalError)
PRIVLEAK_DEFINE_ERROR(Infeasible, NumericalError)
PRIVLEAK_DEFINE_ERROR(Unstable, NumericalError)
PRIVLEAK_DEFINE_ERROR(AlreadyFullyPrivate, NumericalError)

PRIVLEAK_DEFINE_ERROR(ShapeError, ConfigError)
PRIVLEAK_DEFINE_ERROR(ParseError, ConfigError)
PRIVLEAK_DEFINE_ERROR(ValueError, ConfigError)
PRIVLEAK_DEFINE_ERROR(IndexError, ConfigError)
PRIVLEAK_DEFINE_ERROR(EmptyTauRange, ConfigError)
PRIVLEAK_DEFINE_ERROR(LengthMismatch, ConfigError)
PRIVLEAK_DEFINE_ERROR(InvalidArgument, ConfigError)

#undef PRIVLEAK_DEFINE_ERROR

}  // namespace privleak
