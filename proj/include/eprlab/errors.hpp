#pragma once

#include <stdexcept>
#include <string>

namespace eprlab {

// Every rejection names the violated invariant and, where meaningful, the
// measured magnitude of the violation.
enum class errc {
  not_hermitian,
  trace_not_one,
  not_positive_semidefinite,
  dimension_mismatch,
  index_out_of_range,
  not_unitary,
  not_unit_vector,
  not_bijection,
  invalid_tolerance,
  invalid_distribution,
  invalid_argument,
  parse_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::not_hermitian:             return "NotHermitian";
    case errc::trace_not_one:             return "TraceNotOne";
    case errc::not_positive_semidefinite: return "NotPositiveSemidefinite";
    case errc::dimension_mismatch:        return "DimensionMismatch";
    case errc::index_out_of_range:        return "IndexOutOfRange";
    case errc::not_unitary:               return "NotUnitary";
    case errc::not_unit_vector:           return "NotUnitVector";
    case errc::not_bijection:             return "NotBijection";
    case errc::invalid_tolerance:         return "InvalidTolerance";
    case errc::invalid_distribution:      return "InvalidDistribution";
    case errc::invalid_argument:          return "InvalidArgument";
    case errc::parse_error:               return "ParseError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what, double magnitude = 0.0)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code),
        magnitude_(magnitude) {}

  errc code() const noexcept { return code_; }

  // Measured size of the violation (e.g. the min eigenvalue for a PSD
  // failure, the max deviation for a Hermiticity failure).
  double magnitude() const noexcept { return magnitude_; }

 private:
  errc code_;
  double magnitude_;
};

}  // namespace eprlab
