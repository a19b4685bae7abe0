#pragma once

#include <stdexcept>
#include <string>

namespace divlab {

// Base class for all domain errors thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidResolution : Error {
  using Error::Error;
};
struct ResolutionTooCoarse : Error {
  using Error::Error;
};
struct PointOutsideDomain : Error {
  using Error::Error;
};
struct NormalizationFailure : Error {
  using Error::Error;
};
struct ValueBelowKmin : Error {
  using Error::Error;
};
struct NonPositiveConductivity : Error {
  using Error::Error;
};
struct SolverDivergence : Error {
  using Error::Error;
};
struct QuadratureNonConvergence : Error {
  using Error::Error;
};
struct VariantMismatch : Error {
  using Error::Error;
};
struct UnsupportedLevel : Error {
  using Error::Error;
};
struct EmptyChain : Error {
  using Error::Error;
};
struct DomainViolation : Error {
  using Error::Error;
};
struct InsufficientPoints : Error {
  using Error::Error;
};
struct NonPositiveError : Error {
  using Error::Error;
};
struct DegenerateDenominator : Error {
  using Error::Error;
};
struct ChainStalled : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace divlab
