#pragma once

#include <stdexcept>
#include <string>

namespace vanc {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a streaming contract (wrong sample counts, non-finite input).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Unsupported or malformed file content.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario configuration could not be parsed or validated.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IdentificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No marker pixels survived binarization.
class TargetLostError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vanc
