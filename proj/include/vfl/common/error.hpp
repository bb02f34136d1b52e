#pragma once

#include <stdexcept>
#include <string>

namespace vfl {

// Invalid configuration or input files. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A protocol step could not complete (codec overflow, inconsistent messages).
// The CLI maps this to exit code 3.
class ProtocolAbort : public std::runtime_error {
 public:
  ProtocolAbort(const std::string& step, const std::string& what)
      : std::runtime_error("protocol abort at " + step + ": " + what), step_(step) {}
  const std::string& step() const { return step_; }

 private:
  std::string step_;
};

// Raised when an attack operation needs a capability the adversary lacks,
// e.g. decryption without a corrupted coordinator.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace vfl
