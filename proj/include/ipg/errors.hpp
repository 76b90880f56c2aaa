#pragma once

#include <stdexcept>
#include <string>

namespace ipg {

// Base class for every error raised by the library.  Callers that do not care
// about the precise failure mode can catch this one type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define IPG_DEFINE_ERROR(NAME)                                         \
  class NAME : public Error {                                          \
   public:                                                             \
    explicit NAME(const std::string& what) : Error(#NAME ": " + what) {} \
  }

IPG_DEFINE_ERROR(DimensionMismatch);
IPG_DEFINE_ERROR(EmptyCloud);
IPG_DEFINE_ERROR(DegenerateCloud);
IPG_DEFINE_ERROR(DuplicatePoints);
IPG_DEFINE_ERROR(MissingTree);
IPG_DEFINE_ERROR(BadOracle);
IPG_DEFINE_ERROR(BadIteration);
IPG_DEFINE_ERROR(ZeroDimension);
IPG_DEFINE_ERROR(AmbientTooSmall);
IPG_DEFINE_ERROR(NonpositiveStep);
IPG_DEFINE_ERROR(GammaOutOfRange);
IPG_DEFINE_ERROR(StepOutOfRange);
IPG_DEFINE_ERROR(RateOutOfRange);
IPG_DEFINE_ERROR(ConditionViolated);
IPG_DEFINE_ERROR(EpsilonTooLarge);
IPG_DEFINE_ERROR(TooLargeToEnumerate);
IPG_DEFINE_ERROR(XStarNotInModel);
IPG_DEFINE_ERROR(ParseError);
IPG_DEFINE_ERROR(IoError);

#undef IPG_DEFINE_ERROR

}  // namespace ipg
