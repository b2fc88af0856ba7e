#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace nilsym {

/// Scientific rendering used in diagnostics.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PoleError : public Error {
 public:
  using Error::Error;
};

/// A point or configuration lies outside the region where a quantity is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

class MaxIterExceeded : public Error {
 public:
  using Error::Error;
};

class LinearSolveFailure : public Error {
 public:
  using Error::Error;
};

/// The connection fails the zero-curvature test; integrated frames would depend on the path.
class NonFlatInput : public Error {
 public:
  using Error::Error;
};

class SingularFrame : public Error {
 public:
  using Error::Error;
};

/// A matrix is not of the form expected by the matrix model of Nil3.
class ShapeViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateNode : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace nilsym
