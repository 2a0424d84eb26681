#pragma once

#include <stdexcept>
#include <string>

namespace tli {

/// Base for every error raised by the library. The CLI maps all of these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// graph documents
class SchemaError : public Error {
 public:
  using Error::Error;
};
class CycleError : public Error {
 public:
  using Error::Error;
};
class DanglingRefError : public Error {
 public:
  using Error::Error;
};

// tensor containers
class HeaderError : public Error {
 public:
  using Error::Error;
};
class BoundsError : public Error {
 public:
  using Error::Error;
};
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// tensor kernels and orchestration
class RankMismatchError : public Error {
 public:
  using Error::Error;
};
class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};
class ShapeError : public Error {
 public:
  using Error::Error;
};
class EmptyModelError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace tli
