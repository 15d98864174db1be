#pragma once

#include <stdexcept>
#include <string>

namespace mixmkl {

// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Chain validation / spectral analysis.
struct NonStochastic : Error { using Error::Error; };
struct TooSmall : Error { using Error::Error; };
struct NotErgodic : Error { using Error::Error; };
struct ZeroStationaryMass : Error { using Error::Error; };
struct NotMixedWithinHorizon : Error { using Error::Error; };
struct NeverMixes : Error { using Error::Error; };
struct NotAbsolutelyContinuous : Error { using Error::Error; };

// Pool aggregation.
struct DegenerateGap : Error { using Error::Error; };
struct EmptyPool : Error { using Error::Error; };

// Data simulation.
struct MissingEmissionTable : Error { using Error::Error; };

// Kernels and learning.
struct DimensionMismatch : Error { using Error::Error; };
struct SizeMismatch : Error { using Error::Error; };
struct InvalidWeights : Error { using Error::Error; };
struct UnboundedKernel : Error { using Error::Error; };
struct UnknownFamily : Error { using Error::Error; };
struct SingleClassData : Error { using Error::Error; };
struct InvalidMargin : Error { using Error::Error; };

// Bound evaluation.
struct MissingInput : Error { using Error::Error; };
struct InvalidConjugates : Error { using Error::Error; };

// Verification harness / IO.
struct ConfigError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };

// Precondition violations not covered by a dedicated type above.
struct InvalidArgument : Error { using Error::Error; };

}  // namespace mixmkl
