#pragma once

#include <stdexcept>
#include <string>

namespace smasim {

// Bad or inconsistent configuration (files, parameter ranges, schedules).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Parameter identification failed: rank-deficient data or a fit outside the
// physically meaningful range. Deliberately not clamped away.
class CalibrationError : public std::runtime_error {
 public:
  explicit CalibrationError(const std::string& what)
      : std::runtime_error(what) {}
};

// A run was refused because its safety precondition (the invariance
// certificate) does not hold.
class SafetyPreconditionError : public std::runtime_error {
 public:
  explicit SafetyPreconditionError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace smasim
