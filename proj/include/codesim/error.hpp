#pragma once

#include <stdexcept>
#include <string>

namespace codesim {

/// Base class for every error raised by the library. The concrete subclasses
/// name the failure so callers can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CODESIM_DEFINE_ERROR(Name) \
  class Name : public Error {      \
   public:                         \
    using Error::Error;            \
  }

// dsl
CODESIM_DEFINE_ERROR(StepLimitExceeded);
CODESIM_DEFINE_ERROR(UninitialisedRead);
CODESIM_DEFINE_ERROR(NotStraightLine);
CODESIM_DEFINE_ERROR(ParseError);
CODESIM_DEFINE_ERROR(IntegerOverflow);
// taskgen
CODESIM_DEFINE_ERROR(InfeasibleParams);
// algolib
CODESIM_DEFINE_ERROR(UnknownIdentifier);
CODESIM_DEFINE_ERROR(UnknownAlgorithm);
// prompting
CODESIM_DEFINE_ERROR(StyleMismatch);
// metrics
CODESIM_DEFINE_ERROR(EmptyInput);
CODESIM_DEFINE_ERROR(LengthMismatch);
CODESIM_DEFINE_ERROR(MissingTokenCounts);
// harness
CODESIM_DEFINE_ERROR(ConfigError);
CODESIM_DEFINE_ERROR(FixtureMissing);
CODESIM_DEFINE_ERROR(IoError);
CODESIM_DEFINE_ERROR(SchemaVersionMismatch);
CODESIM_DEFINE_ERROR(CapabilityMissing);

#undef CODESIM_DEFINE_ERROR

}  // namespace codesim
