#pragma once

#include <stdexcept>
#include <string>

namespace matphi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MATPHI_ERROR(Name)                      \
  class Name : public Error {                   \
   public:                                      \
    explicit Name(const std::string& what)      \
        : Error(#Name ": " + what) {}           \
  };

MATPHI_ERROR(NotHermitian)
MATPHI_ERROR(SpectrumOutOfDomain)
MATPHI_ERROR(InvalidExponent)
MATPHI_ERROR(DimensionMismatch)
MATPHI_ERROR(DomainError)
MATPHI_ERROR(SingularSuperoperator)
MATPHI_ERROR(SingularMatrix)
MATPHI_ERROR(NotCommuting)
MATPHI_ERROR(IndexOutOfRange)
MATPHI_ERROR(EnumerationTooLarge)
MATPHI_ERROR(SeparateConvexityViolated)
MATPHI_ERROR(NotAdmissible)
MATPHI_ERROR(SupportError)
MATPHI_ERROR(InvalidC)
MATPHI_ERROR(ConfigError)

#undef MATPHI_ERROR

}  // namespace matphi
