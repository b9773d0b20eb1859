#pragma once

#include <stdexcept>
#include <string>

namespace runscape {

// Base of every error the library throws on a contract failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class EmptyGraphError : public Error {
 public:
  using Error::Error;
};

class NoSnapError : public Error {
 public:
  using Error::Error;
};

class NoPathError : public Error {
 public:
  using Error::Error;
};

// Raised by round-trip generation. Carries the length of the closest
// candidate when at least one candidate was produced (negative otherwise).
class NoRouteError : public Error {
 public:
  NoRouteError(const std::string& what, double closest_length_m = -1.0)
      : Error(what), closest_length_m_(closest_length_m) {}
  double closest_length_m() const noexcept { return closest_length_m_; }

 private:
  double closest_length_m_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

class UnknownKeyError : public Error {
 public:
  using Error::Error;
};

class ExcludedTagError : public Error {
 public:
  using Error::Error;
};

class BatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace runscape
