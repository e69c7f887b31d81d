#pragma once

#include <stdexcept>
#include <string>

namespace enopt {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define ENOPT_DEFINE_ERROR(Name)                                               \
  class Name : public Error {                                                  \
  public:                                                                      \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {}         \
  }

// expr
ENOPT_DEFINE_ERROR(MissingBinding);
ENOPT_DEFINE_ERROR(DomainError);
ENOPT_DEFINE_ERROR(NonSmooth);
ENOPT_DEFINE_ERROR(UnsupportedTag);
ENOPT_DEFINE_ERROR(ParseError);
ENOPT_DEFINE_ERROR(NotLinearInSymbol);

// model / system
ENOPT_DEFINE_ERROR(DuplicateName);
ENOPT_DEFINE_ERROR(BadBounds);
ENOPT_DEFINE_ERROR(UnknownId);
ENOPT_DEFINE_ERROR(AlreadyState);
ENOPT_DEFINE_ERROR(ForeignSymbol);
ENOPT_DEFINE_ERROR(AlreadyConnected);
ENOPT_DEFINE_ERROR(UnknownConnector);
ENOPT_DEFINE_ERROR(StageMismatch);
ENOPT_DEFINE_ERROR(FrozenModel);

// problem
ENOPT_DEFINE_ERROR(MissingData);
ENOPT_DEFINE_ERROR(ShapeMismatch);
ENOPT_DEFINE_ERROR(UnknownSymbol);
ENOPT_DEFINE_ERROR(ValidationFailed);

// transform
ENOPT_DEFINE_ERROR(MissingInitial);
ENOPT_DEFINE_ERROR(MissingStep);
ENOPT_DEFINE_ERROR(UnboundedVariable);
ENOPT_DEFINE_ERROR(GridMismatch);
ENOPT_DEFINE_ERROR(NonPositiveEps);

// flatten
ENOPT_DEFINE_ERROR(NonlinearModel);
ENOPT_DEFINE_ERROR(NonlinearAfterLinearize);
ENOPT_DEFINE_ERROR(UnknownVariable);
ENOPT_DEFINE_ERROR(MalformedLine);

// solve
ENOPT_DEFINE_ERROR(NotLinear);
ENOPT_DEFINE_ERROR(MissingValue);

// algorithms
ENOPT_DEFINE_ERROR(BadK);
ENOPT_DEFINE_ERROR(SolverFailure);
ENOPT_DEFINE_ERROR(MissingBinaryValue);

// library
ENOPT_DEFINE_ERROR(BadParams);
ENOPT_DEFINE_ERROR(OverdeterminedSide);
ENOPT_DEFINE_ERROR(UnderdeterminedBothSides);

#undef ENOPT_DEFINE_ERROR

}  // namespace enopt
