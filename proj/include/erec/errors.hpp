#pragma once

#include <stdexcept>

namespace erec {

/** Base type for all errors thrown by this library. */
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/** A parameter that must be strictly positive (or inside an open range) is not. */
class NonPositiveParameter : public Error {
 public:
  using Error::Error;
};

/** Containers whose shapes must agree do not. */
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/** A state-indexed object does not match the automaton it is used with. */
class StateSpaceMismatch : public Error {
 public:
  using Error::Error;
};

/** An iterative solve exhausted its iteration budget before reaching tolerance. */
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/** The junior/senior construction requires a strictly submodular dilemma (g > l). */
class NotSubmodular : public Error {
 public:
  using Error::Error;
};

/** A solved object failed its own consistency checks. */
class VerificationFailure : public Error {
 public:
  using Error::Error;
};

/** The stage game has no strictly dominant action for the requested role. */
class NoDominantAction : public Error {
 public:
  using Error::Error;
};

/** The monitoring structure's signal support depends on the opponents' actions. */
class SupportShifts : public Error {
 public:
  using Error::Error;
};

/** A band decomposition was requested for a profile that fails incentive checks. */
class NotCertified : public Error {
 public:
  using Error::Error;
};

/** A run configuration file is malformed or inconsistent. */
class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

}  // namespace erec
