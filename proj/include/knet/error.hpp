#pragma once

#include <stdexcept>
#include <string>

namespace knet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file did not match its documented schema. `field()` names the
/// offending field.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& what)
      : Error("schema error in field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A parameter was outside its documented range.
class RangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace knet
