#pragma once

#include <stdexcept>
#include <string>

namespace protomol {

// Base for everything thrown by this library. Each concrete type maps to one
// failure condition so call sites and tests can catch them selectively.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PROTOMOL_DEFINE_ERROR(NAME)          \
  class NAME : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

// Tensor / tape
PROTOMOL_DEFINE_ERROR(ShapeMismatch);
PROTOMOL_DEFINE_ERROR(DomainError);
PROTOMOL_DEFINE_ERROR(NumericalError);
PROTOMOL_DEFINE_ERROR(NonScalarOutput);

// SMILES parsing
PROTOMOL_DEFINE_ERROR(EmptyInput);
PROTOMOL_DEFINE_ERROR(UnknownAtomSymbol);
PROTOMOL_DEFINE_ERROR(UnbalancedParenthesis);
PROTOMOL_DEFINE_ERROR(UnclosedRingBond);

// Dataset ingestion
PROTOMOL_DEFINE_ERROR(UnreadableFile);
PROTOMOL_DEFINE_ERROR(MissingColumn);
PROTOMOL_DEFINE_ERROR(NonNumericTarget);
PROTOMOL_DEFINE_ERROR(NonIntegerTarget);

// Text branch
PROTOMOL_DEFINE_ERROR(EmptyText);

// Prototype space
PROTOMOL_DEFINE_ERROR(KTooLarge);

// Objectives
PROTOMOL_DEFINE_ERROR(DegenerateConfig);
PROTOMOL_DEFINE_ERROR(ZeroVectorPrototype);
PROTOMOL_DEFINE_ERROR(InvalidLabel);

// Trainer / metrics
PROTOMOL_DEFINE_ERROR(TooFewRecords);
PROTOMOL_DEFINE_ERROR(SingleClassInput);
PROTOMOL_DEFINE_ERROR(LengthMismatch);
PROTOMOL_DEFINE_ERROR(LayerCountMismatch);
PROTOMOL_DEFINE_ERROR(NonFiniteLoss);

// CLI / persistence
PROTOMOL_DEFINE_ERROR(ConfigError);
PROTOMOL_DEFINE_ERROR(CheckpointError);

#undef PROTOMOL_DEFINE_ERROR

}  // namespace protomol
