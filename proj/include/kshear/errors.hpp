#pragma once

#include <stdexcept>
#include <string>

namespace kshear {

/// Input rejected by a precondition check (dimension mismatch, bad parameter).
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A profile is not spectrally resolved at the requested truncation.
class UnresolvedProfile : public std::runtime_error {
public:
  UnresolvedProfile(const std::string& what, int required_modes)
      : std::runtime_error(what), required_modes_(required_modes) {}

  /// Smallest mode count that would resolve the profile, or -1 if unknown.
  int requiredModes() const { return required_modes_; }

private:
  int required_modes_;
};

/// The sample grid cannot resolve the structure being audited.
class RefinementRequired : public std::runtime_error {
public:
  RefinementRequired(const std::string& what, int required_points)
      : std::runtime_error(what), required_points_(required_points) {}

  int requiredPoints() const { return required_points_; }

private:
  int required_points_;
};

/// Non-finite values or an L2 norm above the blow-up threshold.
class BlowUp : public std::runtime_error {
public:
  BlowUp(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}

  double time() const { return t_; }

private:
  double t_;
};

}  // namespace kshear
