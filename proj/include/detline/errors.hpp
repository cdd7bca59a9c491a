#pragma once

#include <stdexcept>
#include <string>

namespace detline {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define DETLINE_ERROR(Name)                                              \
    class Name : public Error {                                          \
    public:                                                              \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

DETLINE_ERROR(NotExact);
DETLINE_ERROR(ShapeMismatch);
DETLINE_ERROR(NotFredholm);
DETLINE_ERROR(NotDeterminantClass);
DETLINE_ERROR(NotFiniteRank);
DETLINE_ERROR(Unstable);
DETLINE_ERROR(NotTraceClassDifference);
DETLINE_ERROR(IndexMismatch);
DETLINE_ERROR(NotComplementary);
DETLINE_ERROR(NotQuasiIso);
DETLINE_ERROR(Uncertified);
DETLINE_ERROR(BranchJump);
DETLINE_ERROR(IdealViolation);
DETLINE_ERROR(ExponentRange);
DETLINE_ERROR(ParseError);

#undef DETLINE_ERROR

}  // namespace detline
