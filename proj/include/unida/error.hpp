#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace unida {

// Base of every error thrown by the library. Callers that only care about
// success/failure catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define UNIDA_DEFINE_ERROR(Name)              \
  class Name : public Error {                 \
   public:                                    \
    explicit Name(const std::string& what)    \
        : Error(std::string(#Name ": ") + what) {} \
  }

UNIDA_DEFINE_ERROR(FormatError);
UNIDA_DEFINE_ERROR(NonFinite);
UNIDA_DEFINE_ERROR(DegenerateConfig);
UNIDA_DEFINE_ERROR(TooFewSamples);
UNIDA_DEFINE_ERROR(DimensionMismatch);
UNIDA_DEFINE_ERROR(DecompositionFailure);
UNIDA_DEFINE_ERROR(MissingLabels);
UNIDA_DEFINE_ERROR(BadAlpha);
UNIDA_DEFINE_ERROR(IndexOutOfRange);
UNIDA_DEFINE_ERROR(KTooLarge);
UNIDA_DEFINE_ERROR(NotSymmetric);
UNIDA_DEFINE_ERROR(NoConvergence);
UNIDA_DEFINE_ERROR(TooFewNeighbors);
UNIDA_DEFINE_ERROR(ZeroRadius);
UNIDA_DEFINE_ERROR(NoPositives);
UNIDA_DEFINE_ERROR(LengthMismatch);
UNIDA_DEFINE_ERROR(IoError);
UNIDA_DEFINE_ERROR(ConfigError);
UNIDA_DEFINE_ERROR(InvalidArgument);

#undef UNIDA_DEFINE_ERROR

class ZeroRow : public Error {
 public:
  explicit ZeroRow(std::size_t index)
      : Error("ZeroRow: row " + std::to_string(index) + " has zero norm"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace unida
