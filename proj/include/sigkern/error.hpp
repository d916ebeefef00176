#pragma once

#include <stdexcept>
#include <string>

namespace sigkern {

// Every failure surfaced by the library carries one of these codes so
// callers (and tests) can match on the condition rather than the message.
enum class Errc {
  // parsing
  SyntaxError,
  DuplicateParam,
  ConflictingFlags,
  UnknownFlag,
  UnknownType,
  ConflictingFixedSize,
  AllTemporaries,
  UnknownParam,
  UnknownDim,
  UnboundDim,
  UnknownBuiltin,
  UnknownCompField,
  UnknownTypeLetter,
  EmptyGenericList,
  TypeSwitchMissingLetter,
  // arrays
  IndexOutOfBounds,
  NullArrayAccess,
  // engine
  DuplicateOpName,
  UnknownOp,
  KernelValidationError,
  ActiveDimMismatch,
  FixedSizeMismatch,
  ThreadDimMismatch,
  MissingInput,
  NullInput,
  SuppliedOcaParam,
  MissingNcOutput,
  BadValuesForbidden,
  SizeReadInRedoDims,
  ElementAccessInRedoDims,
  NegativeAssignedSize,
  InplaceShapeMismatch,
  OutputShapeMismatch,
  TypeNotInGenericList,
  NoBadVariant,
  BadOtherPar,
  // dataflow
  MissingRedoDimsMetadata,
  IrreversibleWrite,
  SliceOutOfRange,
  ZeroStep,
  CycleDetected,
  NotAFlowOp,
  // cli formats
  CountMismatch,
  UnknownDtypeName,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace sigkern
