#pragma once

#include <stdexcept>
#include <string>

namespace epps {

/// Broad failure category; the CLI maps these onto exit codes.
enum class ErrorKind { parameter, data, numeric };

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// Invalid model or configuration parameters.
struct ParameterError : Error {
  explicit ParameterError(const std::string& what)
      : Error(ErrorKind::parameter, what) {}
};

/// Hawkes specification is not sub-critical.
struct StabilityError : Error {
  StabilityError(const std::string& what, double radius)
      : Error(ErrorKind::numeric, what), spectral_radius(radius) {}
  double spectral_radius;
};

/// Formula evaluated outside its domain (zero denominators and the like).
struct DomainError : Error {
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

/// Input sequence that must be non-empty was empty.
struct EmptyInputError : Error {
  explicit EmptyInputError(const std::string& what)
      : Error(ErrorKind::data, what) {}
};

/// Two inputs that must share a shape (grid step, length) do not.
struct ShapeError : Error {
  explicit ShapeError(const std::string& what)
      : Error(ErrorKind::data, what) {}
};

/// A time lies outside the domain of the object it indexes.
struct RangeError : Error {
  explicit RangeError(const std::string& what)
      : Error(ErrorKind::data, what) {}
};

/// Realised variance of one leg is zero, so no correlation exists.
struct DegenerateVarianceError : Error {
  DegenerateVarianceError(const std::string& what, int flat_leg)
      : Error(ErrorKind::numeric, what), leg(flat_leg) {}
  /// 0 = first leg, 1 = second leg, 2 = both.
  int leg;
};

/// Too few observations for the requested statistic.
struct InsufficientDataError : Error {
  explicit InsufficientDataError(const std::string& what)
      : Error(ErrorKind::data, what) {}
};

/// Overlap correction with kappa_ij == 0.
struct NoOverlapError : Error {
  explicit NoOverlapError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

/// Flat-trade correction with p == 1 on a leg.
struct SaturationError : Error {
  explicit SaturationError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

/// Saturation-level scaling with a non-positive level.
struct ScalingError : Error {
  explicit ScalingError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

/// Malformed input file.
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorKind::data, what) {}
};

} // namespace epps
