#pragma once

#include <stdexcept>
#include <string>

namespace martensite {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  using Error::Error;
};

class CflViolation : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class IncompatibleData : public Error {
 public:
  using Error::Error;
};

/// The tracked interface left the admissible band (a+dx, d-dx); one phase vanished.
class InterfaceExit : public Error {
 public:
  using Error::Error;
};

class LevelSetLost : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// NaN or Inf appeared in a monitored quantity.
class NonFinite : public Error {
 public:
  using Error::Error;
};

}  // namespace martensite
