#pragma once

#include <stdexcept>
#include <string>

namespace ereg {

// Argument outside the domain of a model function (e.g. a valve angle past
// the hard stops).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Physically impossible plant state, such as a tank volume collapsing to zero.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ControllerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A throttle or sizing request the plant cannot meet.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ereg
