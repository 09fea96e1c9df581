#pragma once

#include <stdexcept>
#include <string>

namespace qdc {

/// Raised when a request exceeds a backend's enumeration or qubit budget.
/// Oversized instances are rejected outright rather than silently sampled.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qdc
