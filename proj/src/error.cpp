#include "sigkern/error.hpp"

namespace sigkern {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::DuplicateParam: return "DuplicateParam";
    case Errc::ConflictingFlags: return "ConflictingFlags";
    case Errc::UnknownFlag: return "UnknownFlag";
    case Errc::UnknownType: return "UnknownType";
    case Errc::ConflictingFixedSize: return "ConflictingFixedSize";
    case Errc::AllTemporaries: return "AllTemporaries";
    case Errc::UnknownParam: return "UnknownParam";
    case Errc::UnknownDim: return "UnknownDim";
    case Errc::UnboundDim: return "UnboundDim";
    case Errc::UnknownBuiltin: return "UnknownBuiltin";
    case Errc::UnknownCompField: return "UnknownCompField";
    case Errc::UnknownTypeLetter: return "UnknownTypeLetter";
    case Errc::EmptyGenericList: return "EmptyGenericList";
    case Errc::TypeSwitchMissingLetter: return "TypeSwitchMissingLetter";
    case Errc::IndexOutOfBounds: return "IndexOutOfBounds";
    case Errc::NullArrayAccess: return "NullArrayAccess";
    case Errc::DuplicateOpName: return "DuplicateOpName";
    case Errc::UnknownOp: return "UnknownOp";
    case Errc::KernelValidationError: return "KernelValidationError";
    case Errc::ActiveDimMismatch: return "ActiveDimMismatch";
    case Errc::FixedSizeMismatch: return "FixedSizeMismatch";
    case Errc::ThreadDimMismatch: return "ThreadDimMismatch";
    case Errc::MissingInput: return "MissingInput";
    case Errc::NullInput: return "NullInput";
    case Errc::SuppliedOcaParam: return "SuppliedOcaParam";
    case Errc::MissingNcOutput: return "MissingNcOutput";
    case Errc::BadValuesForbidden: return "BadValuesForbidden";
    case Errc::SizeReadInRedoDims: return "SizeReadInRedoDims";
    case Errc::ElementAccessInRedoDims: return "ElementAccessInRedoDims";
    case Errc::NegativeAssignedSize: return "NegativeAssignedSize";
    case Errc::InplaceShapeMismatch: return "InplaceShapeMismatch";
    case Errc::OutputShapeMismatch: return "OutputShapeMismatch";
    case Errc::TypeNotInGenericList: return "TypeNotInGenericList";
    case Errc::NoBadVariant: return "NoBadVariant";
    case Errc::BadOtherPar: return "BadOtherPar";
    case Errc::MissingRedoDimsMetadata: return "MissingRedoDimsMetadata";
    case Errc::IrreversibleWrite: return "IrreversibleWrite";
    case Errc::SliceOutOfRange: return "SliceOutOfRange";
    case Errc::ZeroStep: return "ZeroStep";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::NotAFlowOp: return "NotAFlowOp";
    case Errc::CountMismatch: return "CountMismatch";
    case Errc::UnknownDtypeName: return "UnknownDtypeName";
  }
  return "Error";
}

}  // namespace sigkern
