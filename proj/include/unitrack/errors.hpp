#pragma once

#include <stdexcept>
#include <string>

namespace unitrack {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define UNITRACK_DEFINE_ERROR(NAME)                                     \
  struct NAME : Error {                                                 \
    NAME() : Error(#NAME) {}                                            \
    explicit NAME(const std::string& m) : Error(std::string(#NAME) + ": " + m) {} \
  }

UNITRACK_DEFINE_ERROR(EmptyWindow);
UNITRACK_DEFINE_ERROR(DimensionMismatch);
UNITRACK_DEFINE_ERROR(AsymmetricInput);
UNITRACK_DEFINE_ERROR(NonConvergence);
UNITRACK_DEFINE_ERROR(InvalidDt);
UNITRACK_DEFINE_ERROR(MissingBalance);
UNITRACK_DEFINE_ERROR(MissingGtId);
UNITRACK_DEFINE_ERROR(GapTooLong);
UNITRACK_DEFINE_ERROR(InvalidRate);
UNITRACK_DEFINE_ERROR(RadiusNonPositive);
UNITRACK_DEFINE_ERROR(DivergenceDetected);
UNITRACK_DEFINE_ERROR(InvalidDirection);
UNITRACK_DEFINE_ERROR(ConfigError);

#undef UNITRACK_DEFINE_ERROR

}  // namespace unitrack
