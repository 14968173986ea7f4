#pragma once

#include <stdexcept>
#include <string>

namespace equiosc {

/// Malformed kernel spec, node system, permutation or option.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A kernel was asked for something its family cannot provide (e.g. K'' of a tent).
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The analytic Jacobian formula does not apply at this point.
class JacobianUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No descent direction exists for the requested active set.
class InfeasibleDirection : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace equiosc
