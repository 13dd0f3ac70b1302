#include "loopsoup/error.hpp"

namespace loopsoup {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::NonSquare: return "NonSquare";
    case Errc::NonFinite: return "NonFinite";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::PositiveDiagonal: return "PositiveDiagonal";
    case Errc::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case Errc::RowSumPositive: return "RowSumPositive";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::NegativeTime: return "NegativeTime";
    case Errc::EmptySubset: return "EmptySubset";
    case Errc::InvalidSubset: return "InvalidSubset";
    case Errc::DisagreementBeyondTolerance: return "DisagreementBeyondTolerance";
    case Errc::NonPositiveLambda: return "NonPositiveLambda";
    case Errc::NonPositiveH: return "NonPositiveH";
    case Errc::ZeroDenominator: return "ZeroDenominator";
    case Errc::ChiOnF: return "ChiOnF";
    case Errc::DegenerateLoop: return "DegenerateLoop";
    case Errc::EmptyTuple: return "EmptyTuple";
    case Errc::InvalidCycle: return "InvalidCycle";
    case Errc::RequiresTransient: return "RequiresTransient";
    case Errc::NotTransient: return "NotTransient";
    case Errc::TupleTooLarge: return "TupleTooLarge";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::NonPositiveIndex: return "NonPositiveIndex";
    case Errc::TruncationInfeasible: return "TruncationInfeasible";
    case Errc::MatrixTooLarge: return "MatrixTooLarge";
    case Errc::NonPositiveRho: return "NonPositiveRho";
    case Errc::TruncationTooSmall: return "TruncationTooSmall";
    case Errc::InvalidPartition: return "InvalidPartition";
    case Errc::BadParams: return "BadParams";
    case Errc::Unreachable: return "Unreachable";
    case Errc::NotSelfAvoiding: return "NotSelfAvoiding";
    case Errc::NotASpanningTree: return "NotASpanningTree";
    case Errc::DegenerateConditioning: return "DegenerateConditioning";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ConfigError: return "ConfigError";
    case Errc::SuiteUnknown: return "SuiteUnknown";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace loopsoup
