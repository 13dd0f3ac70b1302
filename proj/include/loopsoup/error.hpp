#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace loopsoup {

enum class Errc {
  NonSquare,
  NonFinite,
  LabelMismatch,
  PositiveDiagonal,
  NegativeOffDiagonal,
  RowSumPositive,
  SingularSystem,
  NegativeTime,
  EmptySubset,
  InvalidSubset,
  DisagreementBeyondTolerance,
  NonPositiveLambda,
  NonPositiveH,
  ZeroDenominator,
  ChiOnF,
  DegenerateLoop,
  EmptyTuple,
  InvalidCycle,
  RequiresTransient,
  NotTransient,
  TupleTooLarge,
  OutOfDomain,
  NonPositiveIndex,
  TruncationInfeasible,
  MatrixTooLarge,
  NonPositiveRho,
  TruncationTooSmall,
  InvalidPartition,
  BadParams,
  Unreachable,
  NotSelfAvoiding,
  NotASpanningTree,
  DegenerateConditioning,
  InvalidArgument,
  ConfigError,
  SuiteUnknown,
  ParseError,
  ValidationError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace loopsoup
