#include "netdecomp/error.hpp"

namespace netdecomp {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNoRoute: return "NoRoute";
    case ErrorCode::kSameEndpoint: return "SameEndpoint";
    case ErrorCode::kLinkNotFound: return "LinkNotFound";
    case ErrorCode::kZeroDemand: return "ZeroDemand";
    case ErrorCode::kSimDiverged: return "SimDiverged";
    case ErrorCode::kMissingRepresentative: return "MissingRepresentative";
    case ErrorCode::kEmptyFilter: return "EmptyFilter";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

}  // namespace netdecomp
