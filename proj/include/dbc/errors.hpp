#pragma once

#include <stdexcept>
#include <string>

namespace dbc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DBC_DEFINE_ERROR(Name)         \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

DBC_DEFINE_ERROR(OutOfRange);
DBC_DEFINE_ERROR(PreconditionError);
DBC_DEFINE_ERROR(TriangulationFailure);
DBC_DEFINE_ERROR(PerturbationFailure);
DBC_DEFINE_ERROR(DegenerateElement);
DBC_DEFINE_ERROR(QuadratureFailure);
DBC_DEFINE_ERROR(SolverDivergence);
DBC_DEFINE_ERROR(NonzeroTrace);
DBC_DEFINE_ERROR(CornerSingularity);
DBC_DEFINE_ERROR(CaseMismatch);
DBC_DEFINE_ERROR(AmbiguousBounds);
DBC_DEFINE_ERROR(MaxIterationsExceeded);
DBC_DEFINE_ERROR(UnsupportedRegime);
DBC_DEFINE_ERROR(IOFailure);
DBC_DEFINE_ERROR(ParseError);

#undef DBC_DEFINE_ERROR

}  // namespace dbc
