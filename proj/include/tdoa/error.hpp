#pragma once

#include <stdexcept>
#include <string>

namespace tdoa {

/// A numerical procedure failed an internal consistency check.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tdoa
