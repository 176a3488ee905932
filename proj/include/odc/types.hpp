#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace odc {

using ArmId = std::uint32_t;
using AgentId = std::uint32_t;
/// Time slots are 1-based; slot 0 means "before the first slot".
using Slot = std::uint64_t;

/// Bad user input: invalid arm index, out-of-range probability, malformed config.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration that is well-formed but violates a model invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Internal protocol corruption (should be unreachable in a correct run).
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace odc
