#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace sigmaevo {

inline constexpr double pi = std::numbers::pi;

/// Thrown when a parameter tuple, grid or configuration violates a stated invariant.
class InvalidParameters : public std::invalid_argument {
 public:
  explicit InvalidParameters(const std::string& what) : std::invalid_argument(what) {}
};

/// Two fields or states were combined across incompatible grids.
class GridMismatch : public std::invalid_argument {
 public:
  explicit GridMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// A series column required by an analysis is absent.
class MissingColumn : public std::out_of_range {
 public:
  explicit MissingColumn(const std::string& column)
      : std::out_of_range("missing column: " + column) {}
};

/// Raised by a single time step when the state stops being finite.
/// Drivers catch it and record the blow-up as a finding.
class BlowUp : public std::runtime_error {
 public:
  BlowUp(double t, const std::string& what) : std::runtime_error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace sigmaevo
