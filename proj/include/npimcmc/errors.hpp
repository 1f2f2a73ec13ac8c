#pragma once

#include <stdexcept>
#include <string>

namespace npimcmc {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionViolation : Error {
  using Error::Error;
};
struct InvalidValue : Error {
  using Error::Error;
};
struct NoSupportedInstance : Error {
  using Error::Error;
};
// No prefix is supported yet but a longer vector may be.
struct NeedsMoreValues : NoSupportedInstance {
  using NoSupportedInstance::NoSupportedInstance;
};
struct GradientUnsupported : Error {
  using Error::Error;
};
struct StepCrossesSupportBoundary : Error {
  using Error::Error;
};
struct RejectionBudgetExceeded : Error {
  using Error::Error;
};
struct SliceInvalid : Error {
  using Error::Error;
};
struct InverseUnavailable : Error {
  using Error::Error;
};
struct DimensionCapExceeded : Error {
  using Error::Error;
};
struct InitialTraceOutOfSupport : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace npimcmc
