#include "dualdecomp/error.hpp"

namespace dualdecomp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kBlockOutsideIncidence: return "BlockOutsideIncidence";
    case ErrorCode::kNonPositiveStrongConvexity: return "NonPositiveStrongConvexity";
    case ErrorCode::kDecoupledAgent: return "DecoupledAgent";
    case ErrorCode::kInvalidObjective: return "InvalidObjective";
    case ErrorCode::kEmptyBlockNeighborhood: return "EmptyBlockNeighborhood";
    case ErrorCode::kNoRootInDomain: return "NoRootInDomain";
    case ErrorCode::kNonConvergence: return "NonConvergence";
    case ErrorCode::kPowerIterationStall: return "PowerIterationStall";
    case ErrorCode::kMissingReference: return "MissingReference";
    case ErrorCode::kDegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kMalformedMatrix: return "MalformedMatrix";
    case ErrorCode::kUnknownBusReference: return "UnknownBusReference";
    case ErrorCode::kNonPositiveReactance: return "NonPositiveReactance";
    case ErrorCode::kEmptyRoute: return "EmptyRoute";
    case ErrorCode::kMissingMessage: return "MissingMessage";
    case ErrorCode::kForeignEdge: return "ForeignEdge";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace dualdecomp
