/**
 * @file errors.hpp
 * @brief Exception types thrown by the imop library.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace imop {

/// Base class for all imop errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Model construction / validation.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};
class InfeasibleRegion : public Error {
 public:
  using Error::Error;
};
class UnboundedRegion : public Error {
 public:
  using Error::Error;
};
class NotPsd : public Error {
 public:
  using Error::Error;
};
class OutOfHypothesisSet : public Error {
 public:
  using Error::Error;
};

// Weight sampling.
class UnsupportedDimension : public Error {
 public:
  using Error::Error;
};
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Scalarized solves.
class NoKktPoint : public Error {
 public:
  using Error::Error;
};
class SingularKktSystem : public Error {
 public:
  using Error::Error;
};

// Implicit update.
class NoFeasibleActiveSet : public Error {
 public:
  using Error::Error;
};
class DegenerateKkt : public Error {
 public:
  using Error::Error;
};
class UnsupportedBlock : public Error {
 public:
  using Error::Error;
};

// Reporting / misc.
class InsufficientExpectedCounts : public Error {
 public:
  using Error::Error;
};
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// File parsing failure; carries a 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line = -1)
      : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace imop
