#pragma once

#include <stdexcept>
#include <string>

namespace vminpred {

// Every failure the library reports maps onto one of two CLI exit codes:
// bad input / schema problems (exit 2) and numerical failures (exit 3).
enum class ErrorKind { input, numerical };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

#define VMINPRED_DEFINE_ERROR(Name, Kind)                        \
  struct Name : Error {                                          \
    explicit Name(const std::string& what)                       \
        : Error(ErrorKind::Kind, std::string(#Name ": ") + what) {} \
  }

// numeric kernels
VMINPRED_DEFINE_ERROR(ShapeMismatch, input);
VMINPRED_DEFINE_ERROR(EmptyInput, input);
VMINPRED_DEFINE_ERROR(RankDeficient, numerical);
VMINPRED_DEFINE_ERROR(ZeroVariance, input);
VMINPRED_DEFINE_ERROR(NonFiniteValue, input);

// data handling
VMINPRED_DEFINE_ERROR(ParseError, input);
VMINPRED_DEFINE_ERROR(SchemaMismatch, input);
VMINPRED_DEFINE_ERROR(EmptyFile, input);
VMINPRED_DEFINE_ERROR(MissingCoordinates, input);
VMINPRED_DEFINE_ERROR(TooFewDies, input);
VMINPRED_DEFINE_ERROR(GroupTooSmall, input);
VMINPRED_DEFINE_ERROR(DuplicateWafer, input);
VMINPRED_DEFINE_ERROR(IoError, input);

// estimators
VMINPRED_DEFINE_ERROR(TooFewSamples, input);
VMINPRED_DEFINE_ERROR(UnknownGroup, input);
VMINPRED_DEFINE_ERROR(UnknownWafer, input);
VMINPRED_DEFINE_ERROR(TooFewWafers, input);
VMINPRED_DEFINE_ERROR(NoInterBiasSource, input);
VMINPRED_DEFINE_ERROR(Diverged, numerical);

// feature selection
VMINPRED_DEFINE_ERROR(EmptySubset, input);
VMINPRED_DEFINE_ERROR(ZeroVarianceColumn, input);

// configuration
VMINPRED_DEFINE_ERROR(InvalidConfig, input);

#undef VMINPRED_DEFINE_ERROR

}  // namespace vminpred
