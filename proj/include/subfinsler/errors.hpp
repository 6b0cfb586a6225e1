#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subfinsler {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. Carries the byte offset of the failure.
class SyntaxError : public Error {
public:
  SyntaxError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Identifier outside the allowed set (x1..xn, x/y/z, sin/cos/exp/sqrt).
class UnknownIdentifier : public Error {
public:
  UnknownIdentifier(const std::string& name, std::size_t offset)
      : Error("unknown identifier '" + name + "' (at offset " + std::to_string(offset) + ")"),
        name_(name), offset_(offset) {}
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

private:
  std::string name_;
  std::size_t offset_;
};

/// Evaluation reached a variable with no bound value.
class UnboundVariable : public Error {
public:
  using Error::Error;
};

/// Structural problem in a spec document: missing/extra/ill-typed fields.
class SchemaError : public Error {
public:
  using Error::Error;
};

/// Well-formed document with invalid content (k > n, non-SPD form, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Point outside the chart domain, division by zero, sqrt of a negative.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Fiber operation applied at w = 0 (or a covector in the annihilator
/// where a nonzero fiber momentum is required).
class ZeroVector : public Error {
public:
  using Error::Error;
};

/// Newton solve failed; signals a norm violating its invariants.
class NoConvergence : public Error {
public:
  using Error::Error;
};

/// exp* requested outside its domain: the extremal left the chart or the
/// step controller failed before t = 1.
class OutsideDomainOfExp : public Error {
public:
  using Error::Error;
};

}  // namespace subfinsler
